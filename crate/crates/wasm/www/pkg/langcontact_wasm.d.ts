/* tslint:disable */
/* eslint-disable */

export function criticalSigma(alpha: number, difficulty: number): number;

export function learnerTrajectories(gamma: number, d: number, freq_g1: number, alpha1: number, alpha2: number, n_learners: number, tokens: number, seed: number): Float64Array;

export function orbitSlice(alpha: number, difficulty: number, n: number): Float64Array;

export function passageCurve(sigma: number, q0: number, d_max: number, n: number, max_gen: number): Float64Array;

export function phase(alpha: number, difficulty: number, sigma: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly criticalSigma: (a: number, b: number) => [number, number, number];
    readonly learnerTrajectories: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly orbitSlice: (a: number, b: number, c: number) => [number, number, number, number];
    readonly passageCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly phase: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
