//! Parameter grid syntax: `0.1,0.2,0.5` or `start:stop:count` (inclusive).

pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("grid must not be empty".into());
    }
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("range {text:?} must look like start:stop:count"));
        };
        let start = number(start)?;
        let stop = number(stop)?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("range count {count:?} is not a positive integer"))?;
        match count {
            0 => return Err(format!("range {text:?} has zero points")),
            1 => vec![start],
            n => {
                let step = (stop - start) / (n - 1) as f64;
                // Pin the last point so `0:1:11` ends exactly on 1.
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            stop
                        } else {
                            start + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    Ok(values)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}
