use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;

/// Dense matrix of a Pauli string such as `"XIZ"` or `"YY"`.
///
/// The first character acts on the leftmost tensor slot (most significant
/// bit). `|0⟩` is the `+1` eigenstate of `Z`. Strings with an odd number of
/// `Y` factors are imaginary and rejected.
pub fn pauli_string(label: &str) -> Result<SymmetricMatrix> {
    let ops: Vec<char> = label.trim().chars().map(|c| c.to_ascii_uppercase()).collect();
    if ops.is_empty() {
        return Err(Error::InvalidInput("empty Pauli string".into()));
    }
    if ops.len() > 13 {
        return Err(Error::Dimension(format!(
            "Pauli string of length {} exceeds the 13-site dense guard",
            ops.len()
        )));
    }
    if let Some(bad) = ops.iter().find(|c| !matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
        return Err(Error::InvalidInput(format!("unknown Pauli factor `{bad}`")));
    }
    let n_y = ops.iter().filter(|&&c| c == 'Y').count();
    if n_y % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "`{label}` has an odd number of Y factors and is not real"
        )));
    }
    let l = ops.len();
    let dim = 1usize << l;
    let mut flip = 0usize;
    for (r, &c) in ops.iter().enumerate() {
        if c == 'X' || c == 'Y' {
            flip |= 1 << (l - 1 - r);
        }
    }
    // i^{n_Y} is ±1 for even n_Y.
    let global = if n_y % 4 == 0 { 1.0 } else { -1.0 };
    let mut m = Mat::zeros(dim, dim);
    for s in 0..dim {
        let mut phase = global;
        for (r, &c) in ops.iter().enumerate() {
            let bit = (s >> (l - 1 - r)) & 1;
            if (c == 'Z' || c == 'Y') && bit == 1 {
                phase = -phase;
            }
        }
        m[(s ^ flip, s)] = phase;
    }
    SymmetricMatrix::new(m)
}

/// Single-site Pauli `kind` on `site` (1-based) of an `l`-qubit register.
pub fn site_pauli(kind: char, site: usize, l: usize) -> Result<SymmetricMatrix> {
    if site == 0 || site > l {
        return Err(Error::Range(format!("site {site} outside 1..={l}")));
    }
    let label: String = (1..=l).map(|r| if r == site { kind } else { 'I' }).collect();
    pauli_string(&label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zz_on_two_qubits() {
        let m = pauli_string("ZZ").unwrap();
        assert_eq!(m.diagonal(), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn x_on_leftmost_flips_msb() {
        let m = pauli_string("XI").unwrap();
        assert_eq!(m.get(2, 0), 1.0);
        assert_eq!(m.get(3, 1), 1.0);
        assert_eq!(m.get(1, 0), 0.0);
    }

    #[test]
    fn yy_matches_hand_matrix() {
        let m = pauli_string("YY").unwrap();
        let want = [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), want[i][j]);
            }
        }
    }

    #[test]
    fn odd_y_rejected() {
        assert!(pauli_string("YI").is_err());
        assert!(pauli_string("XQ").is_err());
    }
}
