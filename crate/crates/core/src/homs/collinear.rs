use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::HomError;

/// Maximal classes of pairwise collinear vectors.
///
/// `classes[c]` lists the indices in class `c` in increasing order; its first
/// index supplies `representatives[c]`, and `vectors[i] = scalars[i] *
/// representative` for every member `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collinearity {
    pub classes: Vec<Vec<usize>>,
    #[serde(serialize_with = "ser_rationals")]
    pub scalars: Vec<BigRational>,
    #[serde(serialize_with = "ser_rational_rows")]
    pub representatives: Vec<Vec<BigRational>>,
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rational))
}

fn ser_rational_rows<S: serde::Serializer>(
    v: &[Vec<BigRational>],
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        v.iter()
            .map(|row| row.iter().map(fmt_rational).collect::<Vec<_>>()),
    )
}

fn collinear(a: &[BigRational], b: &[BigRational]) -> bool {
    for p in 0..a.len() {
        for q in p + 1..a.len() {
            if &a[p] * &b[q] != &a[q] * &b[p] {
                return false;
            }
        }
    }
    true
}

/// Scalar `c` with `b = c * a`, assuming the two are collinear.
fn ratio(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let p = a.iter().position(|x| !x.is_zero()).expect("nonzero vector");
    &b[p] / &a[p]
}

pub fn collinearity_reduction(vectors: &[Vec<BigRational>]) -> Result<Collinearity, HomError> {
    if let Some(len) = vectors.first().map(Vec::len) {
        if vectors.iter().any(|v| v.len() != len) {
            return Err(HomError::Dimension("vectors of different lengths".into()));
        }
    }
    if let Some(i) = vectors.iter().position(|v| v.iter().all(Zero::is_zero)) {
        return Err(HomError::InvalidArgument(format!(
            "vector {} is zero",
            i + 1
        )));
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut scalars = vec![BigRational::one(); vectors.len()];
    for (i, v) in vectors.iter().enumerate() {
        match classes
            .iter_mut()
            .find(|class| collinear(&vectors[class[0]], v))
        {
            Some(class) => {
                scalars[i] = ratio(&vectors[class[0]], v);
                class.push(i);
            }
            None => classes.push(vec![i]),
        }
    }
    let representatives = classes.iter().map(|c| vectors[c[0]].clone()).collect();
    Ok(Collinearity {
        classes,
        scalars,
        representatives,
    })
}

pub fn collinearity_reduction_int(vectors: &[Vec<i64>]) -> Result<Collinearity, HomError> {
    let rational: Vec<Vec<BigRational>> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    collinearity_reduction(&rational)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn reduction_examples() {
        let r = collinearity_reduction_int(&[vec![1, 1], vec![2, 2], vec![1, 2]]).unwrap();
        assert_eq!(r.classes, vec![vec![0, 1], vec![2]]);
        assert_eq!(r.scalars[1], q(2));

        let r = collinearity_reduction_int(&vec![vec![3, 4]; 3]).unwrap();
        assert_eq!(r.classes, vec![vec![0, 1, 2]]);
        assert!(r.scalars.iter().all(|c| c == &q(1)));

        let r = collinearity_reduction_int(&[vec![1, 2], vec![2, 1], vec![3, 6], vec![-1, -2]])
            .unwrap();
        assert_eq!(r.classes, vec![vec![0, 2, 3], vec![1]]);
        assert_eq!(r.scalars[2], q(3));
        assert_eq!(r.scalars[3], q(-1));

        assert!(collinearity_reduction_int(&[vec![1, 2], vec![0, 0]]).is_err());
    }

    #[test]
    fn fractional_scalars() {
        let r = collinearity_reduction_int(&[vec![2, 4], vec![1, 2]]).unwrap();
        assert_eq!(r.scalars[1], BigRational::new(1.into(), 2.into()));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"1/2\""));
    }
}
