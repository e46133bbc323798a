use matsuoka_snake::analysis::sweeps::linspace;

/// Parses `lo:hi`, `lo:hi:n` or a comma-separated list.
pub fn parse_grid(s: &str, default_n: usize) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (lo, hi, n) = match parts.as_slice() {
            [lo, hi] => (num(lo)?, num(hi)?, default_n),
            [lo, hi, n] => (num(lo)?, num(hi)?, n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?),
            _ => return Err(format!("`{s}` is not lo:hi or lo:hi:n")),
        };
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("bad grid `{s}`"));
        }
        Ok(linspace(lo, hi, n))
    } else {
        s.split(',').map(num).collect()
    }
}
