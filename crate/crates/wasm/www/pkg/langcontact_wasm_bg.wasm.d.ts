/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const criticalSigma: (a: number, b: number) => [number, number, number];
export const learnerTrajectories: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const orbitSlice: (a: number, b: number, c: number) => [number, number, number, number];
export const passageCurve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const phase: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
