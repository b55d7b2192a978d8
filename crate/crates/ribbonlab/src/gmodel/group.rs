//! Finite groups given by multiplication tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Group {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
    #[serde(skip)]
    pub inv: Vec<usize>,
    #[serde(skip)]
    pub identity: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("table is not {order} x {order}")]
    Shape { order: usize },
    #[error("entry mul[{i}][{j}] = {val} is out of range")]
    Range { i: usize, j: usize, val: usize },
    #[error("no identity element exists")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails on ({a} {b}) {c} vs {a} ({b} {c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("unknown builtin group `{0}` (use Z1..Z8 or S3)")]
    UnknownBuiltin(String),
    #[error("bad group file: {0}")]
    BadFile(String),
}

impl Group {
    /// Validates all group laws over the full table.
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Group, GroupError> {
        let order = mul.len();
        if order == 0 || mul.iter().any(|row| row.len() != order) {
            return Err(GroupError::Shape { order });
        }
        for (i, row) in mul.iter().enumerate() {
            for (j, &val) in row.iter().enumerate() {
                if val >= order {
                    return Err(GroupError::Range { i, j, val });
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inv = vec![usize::MAX; order];
        for x in 0..order {
            inv[x] = (0..order)
                .find(|&y| mul[x][y] == identity && mul[y][x] == identity)
                .ok_or(GroupError::NoInverse(x))?;
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        Ok(Group {
            order,
            mul,
            inv,
            identity,
        })
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.op(self.op(g, x), self.inverse(g))
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    /// Builtin generators: cyclic `Z1..Z8` and the symmetric group `S3`.
    pub fn builtin(name: &str) -> Result<Group, GroupError> {
        if let Some(n) = name.strip_prefix('Z').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=8).contains(&n) {
                let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
                return Group::from_table(mul);
            }
        }
        if name == "S3" {
            // permutations of {0,1,2} in lexicographic order
            let perms: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let index = |p: &[usize; 3]| perms.iter().position(|q| q == p).unwrap();
            let mul = perms
                .iter()
                .map(|p| {
                    perms
                        .iter()
                        .map(|q| {
                            // (p * q)(x) = p(q(x))
                            let composed = [p[q[0]], p[q[1]], p[q[2]]];
                            index(&composed)
                        })
                        .collect()
                })
                .collect();
            return Group::from_table(mul);
        }
        Err(GroupError::UnknownBuiltin(name.to_string()))
    }
}

#[derive(Deserialize)]
struct GroupFile {
    order: usize,
    mul: Vec<Vec<usize>>,
}

/// Loads `{order, mul: [[int]]}` and validates the laws.
pub fn load_group(json: &str) -> Result<Group, GroupError> {
    let file: GroupFile =
        serde_json::from_str(json).map_err(|e| GroupError::BadFile(e.to_string()))?;
    if file.mul.len() != file.order {
        return Err(GroupError::Shape { order: file.order });
    }
    Group::from_table(file.mul)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s3_is_a_group_of_order_six() {
        let g = Group::builtin("S3").unwrap();
        assert_eq!(g.order, 6);
        assert!(!g.is_abelian());
    }

    #[test]
    fn z2_is_abelian() {
        let g = Group::builtin("Z2").unwrap();
        assert_eq!(g.order, 2);
        assert!(g.is_abelian());
    }

    #[test]
    fn broken_table_reports_the_triple() {
        // a "multiplication" that is not associative
        let mul = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 1, 0]];
        match Group::from_table(mul) {
            Err(GroupError::NotAssociative { .. }) | Err(GroupError::NoInverse(_)) => {}
            other => panic!("expected a law violation, got {other:?}"),
        }
    }

    #[test]
    fn load_group_json() {
        let g = load_group("{\"order\":2,\"mul\":[[0,1],[1,0]]}").unwrap();
        assert_eq!(g.order, 2);
        assert_eq!(g.identity, 0);
    }

    #[test]
    fn conjugation_in_s3_moves_elements() {
        let g = Group::builtin("S3").unwrap();
        let moved = (0..g.order)
            .any(|x| (0..g.order).any(|h| g.conj(h, x) != x));
        assert!(moved);
    }
}
