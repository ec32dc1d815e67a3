//! Time-grid and small tuple parsers shared by the subcommands.

/// Parses `"a:b:logK"` (K log-spaced points), `"a:b:step"`, a comma list or a
/// single number. Endpoints are reproduced exactly.
pub fn parse_time_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number '{s}' in time grid '{spec}'"))
    };
    let times = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [a, b, last] => {
            let (a, b) = (num(a)?, num(b)?);
            if !(b >= a) {
                return Err(format!("time grid '{spec}' runs backwards"));
            }
            if let Some(k) = last.trim().strip_prefix("log") {
                let k: usize = k
                    .parse()
                    .map_err(|_| format!("bad point count in time grid '{spec}'"))?;
                if k < 2 || !(a > 0.0) {
                    return Err(format!("log grid '{spec}' needs a > 0 and at least two points"));
                }
                let (la, lb) = (a.ln(), b.ln());
                let mut ts: Vec<f64> = (0..k)
                    .map(|i| (la + (lb - la) * i as f64 / (k - 1) as f64).exp())
                    .collect();
                ts[0] = a;
                ts[k - 1] = b;
                ts
            } else {
                let step = num(last)?;
                if !(step > 0.0) {
                    return Err(format!("step in time grid '{spec}' must be positive"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                let mut ts: Vec<f64> = (0..=count).map(|i| a + i as f64 * step).collect();
                let end = ts.last_mut().expect("nonempty");
                if (*end - b).abs() <= 1e-9 * step {
                    *end = b;
                }
                ts
            }
        }
        _ => return Err(format!("cannot parse time grid '{spec}'")),
    };
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(format!("time grid '{spec}' has negative or non-finite entries"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(format!("time grid '{spec}' is not strictly increasing"));
    }
    Ok(times)
}

/// Parses `"a:b"` or `"a,b"`.
pub fn parse_pair(spec: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = spec.split([':', ',']).collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.trim().parse::<f64>().map_err(|_| format!("bad number in '{spec}'"))?;
            let b = b.trim().parse::<f64>().map_err(|_| format!("bad number in '{spec}'"))?;
            Ok([a, b])
        }
        _ => Err(format!("expected two numbers in '{spec}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_has_exact_endpoints() {
        let ts = parse_time_grid("20:200:log16").unwrap();
        assert_eq!(ts.len(), 16);
        assert_eq!(ts[0], 20.0);
        assert_eq!(ts[15], 200.0);
    }

    #[test]
    fn step_grid() {
        assert_eq!(parse_time_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let ts = parse_time_grid("50:500:0.1").unwrap();
        assert_eq!(*ts.last().unwrap(), 500.0);
        assert_eq!(ts.len(), 4501);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_time_grid("1,10,100").unwrap(), vec![1.0, 10.0, 100.0]);
        assert_eq!(parse_time_grid("7").unwrap(), vec![7.0]);
        assert!(parse_time_grid("10:1:log4").is_err());
        assert!(parse_time_grid("0:1:log4").is_err());
        assert!(parse_time_grid("1:2:0").is_err());
        assert!(parse_time_grid("3,2").is_err());
        assert_eq!(parse_pair("2,-2").unwrap(), [2.0, -2.0]);
    }
}
