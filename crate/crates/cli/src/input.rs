//! Plain-text matrix files: the dimension `n` on the first line, then `n`
//! rows of `n` whitespace-separated numbers. Blank lines and lines starting
//! with `#` are ignored.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use refined_young::SpdMatrix;

pub fn parse_matrix(text: &str, origin: &str) -> Result<DMatrix<f64>, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, first) = lines
        .next()
        .ok_or_else(|| format!("{origin}:1: empty file, expected the dimension n"))?;
    let n: usize = match first.parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(format!(
                "{origin}:{line}: expected a positive dimension, found `{first}`"
            ))
        }
    };
    let mut entries = Vec::with_capacity(n * n);
    let mut last = line;
    for (row, (line, text)) in lines.by_ref().take(n).enumerate() {
        last = line;
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format!("{origin}:{line}: invalid number `{tok}`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != n {
            return Err(format!(
                "{origin}:{line}: row {} has {} entries, expected {n}",
                row + 1,
                values.len()
            ));
        }
        entries.extend(values);
    }
    if entries.len() != n * n {
        return Err(format!(
            "{origin}:{}: expected {n} rows, found {}",
            last + 1,
            entries.len() / n
        ));
    }
    if let Some((line, _)) = lines.next() {
        return Err(format!("{origin}:{line}: unexpected row after {n} rows"));
    }
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, String> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| format!("{origin}: cannot read: {e}"))?;
    parse_matrix(&text, &origin)
}

pub fn read_spd(path: &Path) -> Result<SpdMatrix, String> {
    SpdMatrix::new(read_matrix(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let m = parse_matrix("# test\n2\n1 2\n\n3 4\n", "m.txt").unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_matrix("2\n1 2\n3 x\n", "m.txt").unwrap_err();
        assert_eq!(e, "m.txt:3: invalid number `x`");
        let e = parse_matrix("2\n1 2 3\n", "m.txt").unwrap_err();
        assert!(e.starts_with("m.txt:2:"), "{e}");
        let e = parse_matrix("2\n1 2\n", "m.txt").unwrap_err();
        assert!(e.starts_with("m.txt:3: expected 2 rows"), "{e}");
        let e = parse_matrix("two\n", "m.txt").unwrap_err();
        assert!(e.starts_with("m.txt:1:"), "{e}");
        let e = parse_matrix("1\n1\n2\n", "m.txt").unwrap_err();
        assert!(e.starts_with("m.txt:3: unexpected row"), "{e}");
    }
}
