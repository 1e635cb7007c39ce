//! Parsers for the range and axis syntaxes accepted on the command line.

/// Integer list: `a..b` (inclusive), `a..=b`, `a,b,c`, or a single value.
pub fn parse_int_range(text: &str) -> Result<Vec<usize>, String> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start in '{text}'"))?;
        let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end in '{text}'"))?;
        if lo > hi {
            return Err(format!("range '{text}' is empty"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("'{s}' is not a non-negative integer")))
        .collect()
}

/// Float axis: `start:stop:step` (stop included when it falls on the grid),
/// a comma list, or a single value.
pub fn parse_axis(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{s}' is not finite"))
        }
    };
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(format!("axis '{text}' needs start <= stop and step > 0"));
            }
            // Index-based so that values do not accumulate rounding error.
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("axis '{text}' has more than 1e6 points"));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(format!("axis '{text}' must be start:stop:step or a list")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_ranges() {
        assert_eq!(parse_int_range("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_int_range("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(parse_int_range("3, 5").unwrap(), vec![3, 5]);
        assert_eq!(parse_int_range("7").unwrap(), vec![7]);
        assert!(parse_int_range("4..1").is_err());
        assert!(parse_int_range("x").is_err());
    }

    #[test]
    fn axes() {
        assert_eq!(parse_axis("0:1000:250").unwrap(), vec![0.0, 250.0, 500.0, 750.0, 1000.0]);
        assert_eq!(parse_axis("0:0.3:0.1").unwrap().len(), 4);
        assert_eq!(parse_axis("1310,1550").unwrap(), vec![1310.0, 1550.0]);
        assert!(parse_axis("5:1:1").is_err());
        assert!(parse_axis("0:1:0").is_err());
        assert!(parse_axis("nan").is_err());
    }
}
