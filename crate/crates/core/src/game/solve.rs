//! Winning regions for both players.
//!
//! The system region is the usual triple fixpoint. The environment region is
//! built layer by layer so that a memoryless-per-counter strategy can be read
//! off it: each layer is attacked through a single system goal.

use super::arena::Arena;
use super::GameError;
use crate::Budget;

pub(crate) const NONE: u32 = u32::MAX;

/// States from which the system can force the successor into `set`. A state
/// with no environment move counts as forced.
pub(crate) fn cpre(a: &Arena, set: &[bool]) -> Vec<bool> {
    a.moves
        .iter()
        .map(|ms| ms.iter().all(|m| m.succ.iter().any(|&t| set[t as usize])))
        .collect()
}

/// States from which the environment can force the successor into `set`.
/// A move with no system answer forces anything.
pub(crate) fn upre(a: &Arena, set: &[bool]) -> Vec<bool> {
    a.moves
        .iter()
        .map(|ms| ms.iter().any(|m| m.succ.iter().all(|&t| set[t as usize])))
        .collect()
}

fn tick(budget: &Budget) -> Result<(), GameError> {
    if budget.expired() {
        Err(GameError::Timeout)
    } else {
        Ok(())
    }
}

/// `sys_goals` and `env_goals` must each be nonempty; pass a single all-true
/// vector for "no goals".
pub(crate) fn sys_winning(
    a: &Arena,
    sys_goals: &[Vec<bool>],
    env_goals: &[Vec<bool>],
    budget: &Budget,
) -> Result<Vec<bool>, GameError> {
    let n = a.len();
    let mut z = vec![true; n];
    loop {
        let cz = cpre(a, &z);
        let mut znew = vec![true; n];
        for b in sys_goals {
            let mut y = vec![false; n];
            loop {
                tick(budget)?;
                let cy = cpre(a, &y);
                let start: Vec<bool> = (0..n).map(|s| (b[s] && cz[s]) || cy[s]).collect();
                let mut ynew = vec![false; n];
                for env in env_goals {
                    let mut x = vec![true; n];
                    loop {
                        let cx = cpre(a, &x);
                        let xn: Vec<bool> = (0..n).map(|s| start[s] || (!env[s] && cx[s])).collect();
                        if xn == x {
                            break;
                        }
                        x = xn;
                    }
                    for s in 0..n {
                        ynew[s] |= x[s];
                    }
                }
                if ynew == y {
                    break;
                }
                y = ynew;
            }
            for s in 0..n {
                znew[s] &= y[s];
            }
        }
        if znew == z {
            return Ok(z);
        }
        z = znew;
    }
}

/// Environment attractor layers with per-layer goal and per-counter ranks.
#[derive(Clone, Debug)]
pub(crate) struct EnvLayers {
    /// 1-based layer of each state; `NONE` for system-winning states.
    pub layer: Vec<u32>,
    /// System goal (0-based) each layer blocks; index `r - 1`.
    pub layer_goal: Vec<usize>,
    /// `rank[i][s]`: rank of `s` in the layer's counter-`i` attractor.
    pub rank: Vec<Vec<u32>>,
}

impl EnvLayers {
    pub fn winning(&self) -> Vec<bool> {
        self.layer.iter().map(|&l| l != NONE).collect()
    }
}

pub(crate) fn env_layers(
    a: &Arena,
    sys_goals: &[Vec<bool>],
    env_goals: &[Vec<bool>],
    budget: &Budget,
) -> Result<EnvLayers, GameError> {
    let n = a.len();
    let m = env_goals.len();
    let mut out = EnvLayers {
        layer: vec![NONE; n],
        layer_goal: Vec::new(),
        rank: vec![vec![NONE; n]; m],
    };
    let mut zp = vec![false; n];
    'layers: loop {
        let ut = upre(a, &zp);
        for (j, b) in sys_goals.iter().enumerate() {
            let (y, ranks) = blocked(a, b, env_goals, &ut, budget)?;
            if (0..n).any(|s| y[s] && !zp[s]) {
                let r = out.layer_goal.len() as u32 + 1;
                for s in 0..n {
                    if y[s] && !zp[s] {
                        out.layer[s] = r;
                        for i in 0..m {
                            out.rank[i][s] = ranks[i][s];
                        }
                        zp[s] = true;
                    }
                }
                out.layer_goal.push(j);
                continue 'layers;
            }
        }
        return Ok(out);
    }
}

/// νY. ∩_i μX. Y ∧ (ut ∨ (¬B ∧ ((A_i ∧ upre Y) ∨ upre X))), with the X ranks
/// of the final iteration.
fn blocked(
    a: &Arena,
    b: &[bool],
    env_goals: &[Vec<bool>],
    ut: &[bool],
    budget: &Budget,
) -> Result<(Vec<bool>, Vec<Vec<u32>>), GameError> {
    let n = a.len();
    let mut y = vec![true; n];
    loop {
        tick(budget)?;
        let uy = upre(a, &y);
        let mut ynew = vec![true; n];
        let mut ranks = Vec::with_capacity(env_goals.len());
        for env in env_goals {
            let mut rank = vec![NONE; n];
            let mut x = vec![false; n];
            let mut step = 0;
            loop {
                step += 1;
                let ux = upre(a, &x);
                let xn: Vec<bool> = (0..n)
                    .map(|s| y[s] && (ut[s] || (!b[s] && ((env[s] && uy[s]) || ux[s]))))
                    .collect();
                for s in 0..n {
                    if xn[s] && !x[s] {
                        rank[s] = step;
                    }
                }
                if xn == x {
                    break;
                }
                x = xn;
            }
            for s in 0..n {
                ynew[s] &= x[s];
            }
            ranks.push(rank);
        }
        if ynew == y {
            return Ok((y, ranks));
        }
        y = ynew;
    }
}
