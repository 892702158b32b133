//! Flat text form of sections used on the command line.
//!
//! ```text
//! zero
//! hopf
//! conformal:a=1,0,0,0
//! constant:c=0.5,1
//! linear:A=0,-1,1,0;b=0,0          (A row-major, square)
//! scaled:hopf:k=0.5
//! scaled:hopf:lambda=1,0,0,0       (axis-linear factor)
//! ```

use std::fmt;
use std::str::FromStr;

use super::{ScalarFieldSpec, SectionSpec};
use crate::error::Error;
use crate::linalg::SquareMatrix;
use crate::scalar::Scalar;

fn err(message: impl Into<String>) -> Error {
    Error::Parse { what: "section", message: message.into() }
}

fn parse_list<T: Scalar>(s: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map(T::lit).map_err(|_| err(format!("bad number `{t}`")))
        })
        .collect()
}

fn write_list<T: Scalar>(f: &mut fmt::Formatter<'_>, v: &[T]) -> fmt::Result {
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

fn keyed<'a>(s: &'a str, key: &str) -> Result<&'a str, Error> {
    s.trim()
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| err(format!("expected `{key}=...`, got `{s}`")))
}

impl<T: Scalar> FromStr for SectionSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        match s {
            "zero" => return Ok(Self::Zero),
            "hopf" => return Ok(Self::Hopf),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("scaled:") {
            let (base, factor) = rest
                .rsplit_once(':')
                .ok_or_else(|| err("expected `scaled:<section>:k=<value>` or `scaled:<section>:lambda=<axis>`"))?;
            let base: SectionSpec<T> = base.parse()?;
            let factor = if let Ok(k) = keyed(factor, "k") {
                let k = k.trim().parse::<f64>().map_err(|_| err(format!("bad number `{k}`")))?;
                ScalarFieldSpec::Constant { k: T::lit(k) }
            } else {
                ScalarFieldSpec::AxisLinear { a: parse_list(keyed(factor, "lambda")?)? }
            };
            return Ok(Self::Rescaled { base: Box::new(base), factor });
        }
        let (family, args) = s.split_once(':').ok_or_else(|| err(format!("unknown section `{s}`")))?;
        match family {
            "conformal" => Ok(Self::ConformalGradient { axis: parse_list(keyed(args, "a")?)? }),
            "constant" => Ok(Self::ConstantTorus { c: parse_list(keyed(args, "c")?)? }),
            "linear" => {
                let (a, b) = args.split_once(';').ok_or_else(|| err("expected `linear:A=...;b=...`"))?;
                let entries: Vec<T> = parse_list(keyed(a, "A")?)?;
                let offset: Vec<T> = parse_list(keyed(b, "b")?)?;
                let dim = offset.len();
                let matrix = SquareMatrix::from_row_major(dim, entries)
                    .ok_or_else(|| err(format!("A must have {} entries to match b", dim * dim)))?;
                Ok(Self::LinearAmbient { matrix, offset })
            }
            other => Err(err(format!("unknown section family `{other}`"))),
        }
    }
}

impl<T: Scalar> fmt::Display for SectionSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("zero"),
            Self::Hopf => f.write_str("hopf"),
            Self::ConformalGradient { axis } => {
                f.write_str("conformal:a=")?;
                write_list(f, axis)
            }
            Self::ConstantTorus { c } => {
                f.write_str("constant:c=")?;
                write_list(f, c)
            }
            Self::LinearAmbient { matrix, offset } => {
                f.write_str("linear:A=")?;
                write_list(f, matrix.as_slice())?;
                f.write_str(";b=")?;
                write_list(f, offset)
            }
            Self::Rescaled { base, factor } => {
                write!(f, "scaled:{base}:")?;
                match factor {
                    ScalarFieldSpec::Constant { k } => write!(f, "k={k}"),
                    ScalarFieldSpec::AxisLinear { a } => {
                        f.write_str("lambda=")?;
                        write_list(f, a)
                    }
                }
            }
        }
    }
}
