use serde::{Deserialize, Serialize};

use super::{HomError, Homomorphism};
use crate::group::{Element, FiniteAbelianGroup, Subgroup};

/// Coefficients `alpha_{ji}` of the linear forms
/// `L_j = alpha_{j1} xi_1 + ... + alpha_{jn} xi_n`, `j = 1..m`, all
/// endomorphisms of one group `X`. Stored as `alphas[j][i]`, zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSystem {
    group: FiniteAbelianGroup,
    alphas: Vec<Vec<Homomorphism>>,
    scalars: Option<Vec<Vec<i64>>>,
}

/// Outcome of a pairwise-intersection condition. `pair` holds the first
/// failing pair of columns (zero-based) and `witness` a nonzero element of
/// the offending intersection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionStatus {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Element>,
}

impl ConditionStatus {
    fn holds() -> Self {
        ConditionStatus {
            holds: true,
            pair: None,
            witness: None,
        }
    }
}

/// One coefficient in JSON: an integer (scalar multiplication) or a
/// row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaEntry {
    Scalar(i64),
    Matrix(Vec<Vec<i64>>),
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    group: FiniteAbelianGroup,
    m: usize,
    n: usize,
    alphas: Vec<Vec<AlphaEntry>>,
}

impl CoefficientSystem {
    pub fn new(
        group: &FiniteAbelianGroup,
        alphas: Vec<Vec<Homomorphism>>,
    ) -> Result<Self, HomError> {
        let m = alphas.len();
        if m == 0 {
            return Err(HomError::InvalidArgument("no linear forms".into()));
        }
        let n = alphas[0].len();
        if n == 0 {
            return Err(HomError::InvalidArgument("no variables".into()));
        }
        for (j, row) in alphas.iter().enumerate() {
            if row.len() != n {
                return Err(HomError::Dimension(format!(
                    "form {} has {} coefficients, expected {n}",
                    j + 1,
                    row.len()
                )));
            }
            for a in row {
                if a.domain() != group || a.codomain() != group {
                    return Err(HomError::Dimension(format!(
                        "coefficient {a:?} is not an endomorphism of {group}"
                    )));
                }
            }
        }
        Ok(CoefficientSystem {
            group: group.clone(),
            alphas,
            scalars: None,
        })
    }

    /// Coefficients acting as multiplication by integers.
    pub fn from_scalars(group: &FiniteAbelianGroup, alphas: &[Vec<i64>]) -> Result<Self, HomError> {
        let homs = alphas
            .iter()
            .map(|row| row.iter().map(|&k| Homomorphism::scalar(group, k)).collect())
            .collect();
        let mut cs = Self::new(group, homs)?;
        cs.scalars = Some(alphas.to_vec());
        Ok(cs)
    }

    pub fn from_entries(
        group: &FiniteAbelianGroup,
        alphas: &[Vec<AlphaEntry>],
    ) -> Result<Self, HomError> {
        if alphas
            .iter()
            .flatten()
            .all(|a| matches!(a, AlphaEntry::Scalar(_)))
        {
            let ints: Vec<Vec<i64>> = alphas
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|a| match a {
                            AlphaEntry::Scalar(k) => *k,
                            AlphaEntry::Matrix(_) => unreachable!(),
                        })
                        .collect()
                })
                .collect();
            return Self::from_scalars(group, &ints);
        }
        let mut homs = Vec::with_capacity(alphas.len());
        for row in alphas {
            let mut out = Vec::with_capacity(row.len());
            for a in row {
                out.push(match a {
                    AlphaEntry::Scalar(k) => Homomorphism::scalar(group, *k),
                    AlphaEntry::Matrix(mat) => Homomorphism::new(group, group, mat)?,
                });
            }
            homs.push(out);
        }
        Self::new(group, homs)
    }

    pub fn from_json(text: &str) -> Result<Self, HomError> {
        let repr: SystemRepr =
            serde_json::from_str(text).map_err(|e| HomError::InvalidArgument(e.to_string()))?;
        let cs = Self::from_entries(&repr.group, &repr.alphas)?;
        if cs.m() != repr.m || cs.n() != repr.n {
            return Err(HomError::Dimension(format!(
                "declared {}x{}, coefficients are {}x{}",
                repr.m,
                repr.n,
                cs.m(),
                cs.n()
            )));
        }
        Ok(cs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let alphas: Vec<Vec<AlphaEntry>> = match &self.scalars {
            Some(s) => s
                .iter()
                .map(|row| row.iter().map(|&k| AlphaEntry::Scalar(k)).collect())
                .collect(),
            None => self
                .alphas
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|a| AlphaEntry::Matrix(a.matrix().to_vec()))
                        .collect()
                })
                .collect(),
        };
        serde_json::to_value(SystemRepr {
            group: self.group.clone(),
            m: self.m(),
            n: self.n(),
            alphas,
        })
        .expect("serializable")
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn m(&self) -> usize {
        self.alphas.len()
    }

    pub fn n(&self) -> usize {
        self.alphas[0].len()
    }

    pub fn alpha(&self, j: usize, i: usize) -> &Homomorphism {
        &self.alphas[j][i]
    }

    pub fn alphas(&self) -> &[Vec<Homomorphism>] {
        &self.alphas
    }

    /// Integer coefficients, when the system was built from scalars.
    pub fn scalars(&self) -> Option<&[Vec<i64>]> {
        self.scalars.as_deref()
    }

    /// `a_{ji}`, the adjoint of `alpha_{ji}`.
    pub fn adjoint(&self, j: usize, i: usize) -> Homomorphism {
        self.alphas[j][i].adjoint()
    }

    pub fn power_group(&self) -> FiniteAbelianGroup {
        self.group.power(self.m()).expect("m >= 1")
    }

    /// `x -> (alpha_{1i} x, ..., alpha_{mi} x)` from `X` into `X^m`.
    pub fn column_map(&self, i: usize) -> Homomorphism {
        let r = self.group.rank();
        let mut matrix = Vec::with_capacity(self.m() * r);
        for row in &self.alphas {
            matrix.extend(row[i].matrix().iter().cloned());
        }
        Homomorphism::new(&self.group, &self.power_group(), &matrix)
            .expect("blocks of valid endomorphisms")
    }

    /// `g_i(y_1, ..., y_m) = a_{1i} y_1 + ... + a_{mi} y_m`, from `Y^m` to `Y`.
    pub fn g_map(&self, i: usize) -> Homomorphism {
        self.column_map(i).adjoint()
    }

    /// `G_i`, the image of the `i`-th column map.
    pub fn column_subgroups(&self) -> Vec<Subgroup> {
        (0..self.n()).map(|i| self.column_map(i).image()).collect()
    }

    pub fn require_monomorphisms(&self) -> Result<(), HomError> {
        for (j, row) in self.alphas.iter().enumerate() {
            for (i, a) in row.iter().enumerate() {
                if !a.is_mono() {
                    return Err(HomError::PreconditionViolated(format!(
                        "coefficient ({},{}) is not a monomorphism",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn require_automorphisms(&self) -> Result<(), HomError> {
        for (j, row) in self.alphas.iter().enumerate() {
            for (i, a) in row.iter().enumerate() {
                if !a.is_auto() {
                    return Err(HomError::PreconditionViolated(format!(
                        "coefficient ({},{}) is not an automorphism",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn all_automorphisms(&self) -> bool {
        self.require_automorphisms().is_ok()
    }

    /// Pairwise triviality of `G_i & G_l`.
    pub fn check_condition_11(&self) -> Result<ConditionStatus, HomError> {
        self.require_monomorphisms()?;
        let subgroups = self.column_subgroups();
        for i in 0..self.n() {
            for l in i + 1..self.n() {
                let meet = subgroups[i].intersect(&subgroups[l])?;
                if !meet.is_trivial() {
                    return Ok(ConditionStatus {
                        holds: false,
                        pair: Some((i, l)),
                        witness: meet.smallest_nonzero(),
                    });
                }
            }
        }
        Ok(ConditionStatus::holds())
    }

    /// For automorphism coefficients: for every pair `i < l`, the common
    /// kernel of `beta_k - beta_p` over all `k, p`, where
    /// `beta_k = alpha_{ki}^{-1} alpha_{kl}`, is trivial.
    pub fn check_condition_12(&self) -> Result<ConditionStatus, HomError> {
        self.require_automorphisms()?;
        let inverses: Vec<Vec<Homomorphism>> = self
            .alphas
            .iter()
            .map(|row| row.iter().map(|a| a.inverse()).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        for i in 0..self.n() {
            for l in i + 1..self.n() {
                let betas: Vec<Homomorphism> = (0..self.m())
                    .map(|k| inverses[k][i].compose(&self.alphas[k][l]))
                    .collect::<Result<_, _>>()?;
                let mut common = Subgroup::full(&self.group);
                for k in 0..self.m() {
                    for p in k + 1..self.m() {
                        common = common.intersect(&betas[k].sub(&betas[p])?.kernel())?;
                    }
                }
                if !common.is_trivial() {
                    return Ok(ConditionStatus {
                        holds: false,
                        pair: Some((i, l)),
                        witness: common.smallest_nonzero(),
                    });
                }
            }
        }
        Ok(ConditionStatus::holds())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: &[i64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(m).unwrap()
    }

    #[test]
    fn condition_examples() {
        let z5 = g(&[5]);
        let cs = CoefficientSystem::from_scalars(&z5, &[vec![1, 1], vec![1, 2]]).unwrap();
        assert!(cs.check_condition_11().unwrap().holds);
        assert!(cs.check_condition_12().unwrap().holds);

        let z2 = g(&[2]);
        let cs = CoefficientSystem::from_scalars(&z2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let c11 = cs.check_condition_11().unwrap();
        assert!(!c11.holds);
        assert_eq!(c11.witness.unwrap().coords(), &[1, 1]);
        assert!(!cs.check_condition_12().unwrap().holds);

        let z3 = g(&[3]);
        let cs = CoefficientSystem::from_scalars(&z3, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert!(!cs.check_condition_12().unwrap().holds);

        let single = CoefficientSystem::from_scalars(&z5, &[vec![1], vec![3]]).unwrap();
        assert!(single.check_condition_11().unwrap().holds);
    }

    #[test]
    fn preconditions() {
        let z4 = g(&[4]);
        let cs = CoefficientSystem::from_scalars(&z4, &[vec![1, 2], vec![1, 1]]).unwrap();
        assert!(matches!(
            cs.check_condition_11(),
            Err(HomError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn g_map_is_sum_of_adjoints() {
        let x = g(&[2, 4]);
        let f = Homomorphism::new(&x, &x, &[vec![1, 1], vec![0, 1]]).unwrap();
        let cs = CoefficientSystem::new(
            &x,
            vec![vec![f.clone(), Homomorphism::identity(&x)], vec![Homomorphism::identity(&x), f.clone()]],
        )
        .unwrap();
        let g0 = cs.g_map(0);
        let ym = cs.power_group();
        for idx in 0..ym.order() {
            let y = ym.element_at(idx);
            let (y1, y2) = y.coords().split_at(2);
            let a = cs.adjoint(0, 0).apply(&x.element(y1).unwrap()).unwrap();
            let b = cs.adjoint(1, 0).apply(&x.element(y2).unwrap()).unwrap();
            assert_eq!(g0.apply(&y).unwrap(), x.add(&a, &b));
        }
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"group":{"moduli":[5]},"m":2,"n":2,"alphas":[[1,1],[1,2]]}"#;
        let cs = CoefficientSystem::from_json(text).unwrap();
        assert_eq!(cs.scalars().unwrap(), &[vec![1, 1], vec![1, 2]]);
        let back = CoefficientSystem::from_json(&cs.to_json().to_string()).unwrap();
        assert_eq!(back, cs);
        let mats = r#"{"group":{"moduli":[2,4]},"m":1,"n":1,"alphas":[[[[1,1],[0,1]]]]}"#;
        assert_eq!(CoefficientSystem::from_json(mats).unwrap().n(), 1);
        let bad = r#"{"group":{"moduli":[5]},"m":3,"n":2,"alphas":[[1,1],[1,2]]}"#;
        assert!(CoefficientSystem::from_json(bad).is_err());
    }
}
