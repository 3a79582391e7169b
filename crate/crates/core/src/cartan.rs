//! Cartan data of type C_n.
//!
//! Nodes are numbered `1..=n` with node `n` the long simple root, so
//! `d = (1, .., 1, 2)` and the only `-2` entry sits at `(n-1, n)`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CartanData {
    pub rank: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<i32>>,
    pub d: Vec<i32>,
    #[serde(skip)]
    b: Vec<Vec<i32>>,
}

impl CartanData {
    /// Builds type C_n, n >= 2.
    pub fn type_c(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRank(n));
        }
        let mut c = vec![vec![0; n]; n];
        for i in 0..n {
            c[i][i] = 2;
            if i + 1 < n {
                c[i][i + 1] = -1;
                c[i + 1][i] = -1;
            }
        }
        c[n - 2][n - 1] = -2;
        let mut d = vec![1; n];
        d[n - 1] = 2;
        Ok(Self::from_parts(c, d))
    }

    /// Rank-one data (`sl_2`), used when comparing against the closed sl_2 formulas.
    pub fn rank_one() -> Self {
        Self::from_parts(vec![vec![2]], vec![1])
    }

    fn from_parts(c: Vec<Vec<i32>>, d: Vec<i32>) -> Self {
        let n = d.len();
        let b = (0..n)
            .map(|i| (0..n).map(|j| d[i] * c[i][j]).collect())
            .collect();
        CartanData { rank: n, c, d, b }
    }

    /// `C_ij` with 1-based nodes.
    pub fn cij(&self, i: usize, j: usize) -> i32 {
        self.c[i - 1][j - 1]
    }

    pub fn di(&self, i: usize) -> i32 {
        self.d[i - 1]
    }

    /// Symmetrized entry `B_ij = d_i C_ij`.
    pub fn bij(&self, i: usize, j: usize) -> i32 {
        self.b[i - 1][j - 1]
    }

    pub fn b_matrix(&self) -> &Vec<Vec<i32>> {
        &self.b
    }

    pub fn check_node(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.rank {
            Err(Error::NodeOutOfRange {
                node: i,
                rank: self.rank,
            })
        } else {
            Ok(())
        }
    }

    pub fn nodes(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.rank
    }

    /// Content hash used by the character cache.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("cartan json"));
        hex::encode(&h.finalize()[..8])
    }

    /// Dimension of the simple module of highest weight `sum lambda_i omega_i`
    /// (Weyl's formula in the orthonormal basis of type C).
    pub fn weyl_dimension(&self, lambda: &[i64]) -> u128 {
        fn gcd(a: u128, b: u128) -> u128 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        let n = self.rank;
        assert_eq!(lambda.len(), n, "weight has the wrong rank");
        assert!(lambda.iter().all(|&x| x >= 0), "weight is not dominant");
        // l_i + rho_i with l_i = lambda_i + .. + lambda_n and rho_i = n - i + 1
        let shifted: Vec<u128> = (0..n)
            .map(|i| (lambda[i..].iter().sum::<i64>() + (n - i) as i64) as u128)
            .collect();
        let rho: Vec<u128> = (0..n).map(|i| (n - i) as u128).collect();
        let (mut num, mut den) = (1u128, 1u128);
        let mut mul = |a: u128, b: u128| {
            num *= a;
            den *= b;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        };
        for i in 0..n {
            for j in i + 1..n {
                mul(shifted[i] - shifted[j], rho[i] - rho[j]);
                mul(shifted[i] + shifted[j], rho[i] + rho[j]);
            }
            mul(shifted[i], rho[i]);
        }
        debug_assert_eq!(den, 1);
        num / den
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "rank": self.rank, "C": self.c, "d": self.d })
    }
}

impl<'de> Deserialize<'de> for CartanData {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "C")]
            c: Vec<Vec<i32>>,
            d: Vec<i32>,
        }
        let r = Raw::deserialize(de)?;
        Ok(CartanData::from_parts(r.c, r.d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weyl_dimensions() {
        let cd = CartanData::type_c(3).unwrap();
        assert_eq!(cd.weyl_dimension(&[1, 0, 0]), 6);
        assert_eq!(cd.weyl_dimension(&[0, 1, 0]), 14);
        assert_eq!(cd.weyl_dimension(&[0, 0, 1]), 14);
        assert_eq!(cd.weyl_dimension(&[0, 2, 0]), 90);
        assert_eq!(
            CartanData::type_c(4).unwrap().weyl_dimension(&[5, 1, 2, 0]),
            1647360
        );
        assert_eq!(CartanData::rank_one().weyl_dimension(&[4]), 5);
    }

    #[test]
    fn c3_matrix() {
        let cd = CartanData::type_c(3).unwrap();
        assert_eq!(cd.c, vec![vec![2, -1, 0], vec![-1, 2, -2], vec![0, -1, 2]]);
        assert_eq!(cd.d, vec![1, 1, 2]);
    }

    #[test]
    fn c2_matrix() {
        let cd = CartanData::type_c(2).unwrap();
        assert_eq!(cd.c, vec![vec![2, -2], vec![-1, 2]]);
        assert_eq!(cd.d, vec![1, 2]);
    }

    #[test]
    fn rank_one_rejected() {
        assert_eq!(CartanData::type_c(1), Err(Error::InvalidRank(1)));
    }

    #[test]
    fn symmetrized() {
        for n in 2..9 {
            let cd = CartanData::type_c(n).unwrap();
            let mut minus_two = vec![];
            for i in 1..=n {
                assert_eq!(cd.cij(i, i), 2);
                for j in 1..=n {
                    assert_eq!(cd.bij(i, j), cd.bij(j, i));
                    if i != j {
                        assert!(cd.cij(i, j) <= 0);
                    }
                    if cd.cij(i, j) == -2 {
                        minus_two.push((i, j));
                    }
                }
            }
            assert_eq!(minus_two, vec![(n - 1, n)]);
        }
    }
}
