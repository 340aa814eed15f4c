//! Two-player parity games with the min-even winning condition.
//!
//! Eve wins a play iff the least color seen infinitely often is even.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    /// The player favoured by a color.
    pub fn of_color(c: u32) -> Player {
        if c % 2 == 0 {
            Player::Eve
        } else {
            Player::Adam
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub color: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
    pub initial: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("position {0} has no outgoing move")]
    DeadEnd(usize),
    #[error("move {0} -> {1} leaves the game")]
    BadMove(usize, usize),
    #[error("initial position {0} out of range")]
    BadInitial(usize),
    #[error("owner, color and move tables differ in length")]
    Shape,
    #[error("strategy at position {0} leaves the region or is not a move")]
    StrategyLeavesRegion(usize),
}

/// Winning regions plus a positional strategy for the winner of each position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// For positions owned by their winner, the chosen successor.
    pub strategy: Vec<Option<usize>>,
}

impl Solution {
    pub fn region(&self, p: Player) -> Vec<bool> {
        self.winner.iter().map(|&w| w == p).collect()
    }
}

impl ParityGame {
    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let n = self.owner.len();
        if self.color.len() != n || self.succ.len() != n {
            return Err(GameError::Shape);
        }
        if self.initial >= n {
            return Err(GameError::BadInitial(self.initial));
        }
        for (v, s) in self.succ.iter().enumerate() {
            if s.is_empty() {
                return Err(GameError::DeadEnd(v));
            }
            if let Some(&w) = s.iter().find(|&&w| w >= n) {
                return Err(GameError::BadMove(v, w));
            }
        }
        Ok(())
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (v, s) in self.succ.iter().enumerate() {
            for &w in s {
                pred[w].push(v);
            }
        }
        pred
    }

    /// Same game with colors renumbered densely, keeping order and parity.
    pub fn compress_colors(&self) -> ParityGame {
        ParityGame { color: compress(&self.color), ..self.clone() }
    }
}

/// Dense renumbering of a coloring that keeps order and parity.
pub fn compress(colors: &[u32]) -> Vec<u32> {
    let mut used: Vec<u32> = colors.to_vec();
    used.sort_unstable();
    used.dedup();
    let mut out = Vec::with_capacity(used.len());
    let mut cur: Option<u32> = None;
    for &c in &used {
        let target = match cur {
            None => c % 2,
            Some(prev) if prev % 2 == c % 2 => prev,
            Some(prev) => prev + 1,
        };
        cur = Some(target);
        out.push((c, target));
    }
    colors.iter().map(|c| out[out.binary_search_by_key(c, |&(k, _)| k).unwrap()].1).collect()
}

/// Attractor of `target` for `pl` inside the positions marked `alive`.
fn attractor(
    g: &ParityGame,
    pred: &[Vec<usize>],
    alive: &[bool],
    target: &[bool],
    pl: Player,
    strat: &mut [Option<usize>],
) -> Vec<bool> {
    let n = g.len();
    let mut attr = vec![false; n];
    let mut count = vec![0usize; n];
    let mut stack = Vec::new();
    for v in 0..n {
        if alive[v] {
            count[v] = g.succ[v].iter().filter(|&&w| alive[w]).count();
            if target[v] {
                attr[v] = true;
                stack.push(v);
            }
        }
    }
    while let Some(w) = stack.pop() {
        for &v in &pred[w] {
            if !alive[v] || attr[v] {
                continue;
            }
            if g.owner[v] == pl {
                attr[v] = true;
                strat[v] = Some(w);
                stack.push(v);
            } else {
                count[v] -= 1;
                if count[v] == 0 {
                    attr[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    attr
}

fn zielonka_rec(
    g: &ParityGame,
    pred: &[Vec<usize>],
    alive: &[bool],
    winner: &mut [Player],
    strat: &mut [Option<usize>],
) {
    let Some(p) = (0..g.len()).filter(|&v| alive[v]).map(|v| g.color[v]).min() else {
        return;
    };
    let pl = Player::of_color(p);
    let target: Vec<bool> = (0..g.len()).map(|v| alive[v] && g.color[v] == p).collect();
    let mut attr_strat = vec![None; g.len()];
    let a = attractor(g, pred, alive, &target, pl, &mut attr_strat);
    let sub: Vec<bool> = (0..g.len()).map(|v| alive[v] && !a[v]).collect();
    zielonka_rec(g, pred, &sub, winner, strat);
    let opp_wins_some = (0..g.len()).any(|v| sub[v] && winner[v] == pl.opponent());
    if !opp_wins_some {
        for v in 0..g.len() {
            if !alive[v] {
                continue;
            }
            winner[v] = pl;
            if a[v] && g.owner[v] == pl {
                strat[v] = if target[v] {
                    g.succ[v].iter().copied().find(|&w| alive[w])
                } else {
                    attr_strat[v]
                };
            }
        }
        return;
    }
    let opp = pl.opponent();
    let w_opp: Vec<bool> = (0..g.len()).map(|v| sub[v] && winner[v] == opp).collect();
    let mut b_strat = vec![None; g.len()];
    let b = attractor(g, pred, alive, &w_opp, opp, &mut b_strat);
    for v in 0..g.len() {
        if b[v] {
            winner[v] = opp;
            if !w_opp[v] && g.owner[v] == opp {
                strat[v] = b_strat[v];
            }
        }
    }
    let rest: Vec<bool> = (0..g.len()).map(|v| alive[v] && !b[v]).collect();
    zielonka_rec(g, pred, &rest, winner, strat);
}

/// Zielonka's recursive algorithm with positional strategy extraction.
pub fn solve_zielonka(g: &ParityGame) -> Solution {
    let g = g.compress_colors();
    let pred = g.predecessors();
    let n = g.len();
    let mut winner = vec![Player::Eve; n];
    let mut strat = vec![None; n];
    zielonka_rec(&g, &pred, &vec![true; n], &mut winner, &mut strat);
    for v in 0..n {
        if g.owner[v] != winner[v] {
            strat[v] = None;
        }
    }
    Solution { winner, strategy: strat }
}

/// Small progress measures lifting. Returns the winner of each position.
pub fn solve_progress_measures(g: &ParityGame) -> Vec<Player> {
    let g = g.compress_colors();
    let n = g.len();
    let maxc = g.color.iter().copied().max().unwrap_or(0) as usize;
    // one component per odd color 1, 3, 5, ...; lower colors are more significant
    let k = maxc.div_ceil(2);
    let mut bound = vec![0u32; k];
    for &c in &g.color {
        if c % 2 == 1 {
            bound[(c as usize) / 2] += 1;
        }
    }
    let prog = |rho: &Option<Vec<u32>>, p: u32| -> Option<Vec<u32>> {
        let m = rho.as_ref()?;
        let upto = if p % 2 == 1 { (p as usize) / 2 + 1 } else { (p as usize) / 2 };
        let mut out = vec![0u32; k];
        out[..upto].copy_from_slice(&m[..upto]);
        if p % 2 == 0 {
            return Some(out);
        }
        let mut i = upto;
        while i > 0 {
            i -= 1;
            if out[i] < bound[i] {
                out[i] += 1;
                return Some(out);
            }
            out[i] = 0;
        }
        None
    };
    // None is the top element
    let le = |a: &Option<Vec<u32>>, b: &Option<Vec<u32>>| match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    };
    let mut rho: Vec<Option<Vec<u32>>> = vec![Some(vec![0; k]); n];
    let pred = g.predecessors();
    let mut queued = vec![true; n];
    let mut work: Vec<usize> = (0..n).collect();
    while let Some(v) = work.pop() {
        queued[v] = false;
        let p = g.color[v];
        let mut best: Option<Option<Vec<u32>>> = None;
        for &w in &g.succ[v] {
            let cand = prog(&rho[w], p);
            best = Some(match best {
                None => cand,
                Some(b) => {
                    let take_cand = match g.owner[v] {
                        Player::Eve => le(&cand, &b),
                        Player::Adam => le(&b, &cand),
                    };
                    if take_cand {
                        cand
                    } else {
                        b
                    }
                }
            });
        }
        let new = best.unwrap_or(None);
        if !le(&new, &rho[v]) {
            rho[v] = new;
            for &u in &pred[v] {
                if !queued[u] {
                    queued[u] = true;
                    work.push(u);
                }
            }
        }
    }
    rho.iter()
        .map(|r| if r.is_some() { Player::Eve } else { Player::Adam })
        .collect()
}

/// Convenience: does Eve win from the initial position?
pub fn eve_wins(g: &ParityGame) -> bool {
    solve_zielonka(g).winner[g.initial] == Player::Eve
}

/// Checks that `strategy` is winning for `pl` on `region`: every cycle of the
/// restricted graph has a least color of `pl`'s parity.
pub fn verify_strategy(
    g: &ParityGame,
    region: &[bool],
    pl: Player,
    strategy: &[Option<usize>],
) -> Result<bool, GameError> {
    let n = g.len();
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if !region[v] {
            continue;
        }
        if g.owner[v] == pl {
            match strategy.get(v).copied().flatten() {
                Some(w) if w < n && region[w] && g.succ[v].contains(&w) => edges[v].push(w),
                _ => return Err(GameError::StrategyLeavesRegion(v)),
            }
        } else {
            for &w in &g.succ[v] {
                if !region[w] {
                    // the opponent escapes
                    return Ok(false);
                }
                edges[v].push(w);
            }
        }
    }
    let mut colors: Vec<u32> = (0..n).filter(|&v| region[v]).map(|v| g.color[v]).collect();
    colors.sort_unstable();
    colors.dedup();
    for c in colors {
        if Player::of_color(c) == pl {
            continue;
        }
        // is some position of color c on a cycle using only colors >= c?
        for start in (0..n).filter(|&v| region[v] && g.color[v] == c) {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = edges[start].clone();
            while let Some(v) = stack.pop() {
                if v == start {
                    return Ok(false);
                }
                if seen[v] || g.color[v] < c {
                    continue;
                }
                seen[v] = true;
                stack.extend(edges[v].iter().copied());
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(owner: Player, c: u32) -> ParityGame {
        ParityGame { owner: vec![owner], color: vec![c], succ: vec![vec![0]], initial: 0 }
    }

    #[test]
    fn trivial_games() {
        for owner in [Player::Eve, Player::Adam] {
            let g = single(owner, 0);
            assert_eq!(solve_zielonka(&g).winner, vec![Player::Eve]);
            assert_eq!(solve_progress_measures(&g), vec![Player::Eve]);
            let g = single(owner, 1);
            assert_eq!(solve_zielonka(&g).winner, vec![Player::Adam]);
            assert_eq!(solve_progress_measures(&g), vec![Player::Adam]);
        }
    }

    #[test]
    fn buchi_fixture() {
        // 0(E,c1) -> 1, 2 ; 1(A,c0) -> 0, 3 ; 2(E,c1) -> 2 ; 3(A,c0) -> 3
        // Eve avoids the odd sink 2 by moving to 1; Adam may go to 3 (color 0 sink)
        // or back to 0, both good for Eve. Hand fixpoint: Eve wins {0,1,3}, Adam {2}.
        let g = ParityGame {
            owner: vec![Player::Eve, Player::Adam, Player::Eve, Player::Adam],
            color: vec![1, 0, 1, 0],
            succ: vec![vec![1, 2], vec![0, 3], vec![2], vec![3]],
            initial: 0,
        };
        use Player::*;
        assert_eq!(solve_progress_measures(&g), vec![Eve, Eve, Adam, Eve]);
        let s = solve_zielonka(&g);
        assert_eq!(s.winner, vec![Eve, Eve, Adam, Eve]);
        assert_eq!(verify_strategy(&g, &s.region(Eve), Eve, &s.strategy), Ok(true));
        assert_eq!(verify_strategy(&g, &s.region(Adam), Adam, &s.strategy), Ok(true));
        let mut bad = s.strategy.clone();
        bad[0] = Some(2);
        assert!(verify_strategy(&g, &s.region(Eve), Eve, &bad).is_err());
    }

    #[test]
    fn flipped_edge_fails() {
        // Eve at 0 chooses between a color-0 loop (1) and a color-1 loop (2).
        let g = ParityGame {
            owner: vec![Player::Eve, Player::Eve, Player::Eve],
            color: vec![2, 0, 1],
            succ: vec![vec![1, 2], vec![0], vec![0]],
            initial: 0,
        };
        let s = solve_zielonka(&g);
        let region = s.region(Player::Eve);
        assert!(region.iter().all(|&b| b));
        assert_eq!(verify_strategy(&g, &region, Player::Eve, &s.strategy), Ok(true));
        let mut bad = s.strategy.clone();
        bad[0] = Some(2);
        assert_eq!(verify_strategy(&g, &region, Player::Eve, &bad), Ok(false));
    }

    #[test]
    fn compression_keeps_order_and_parity() {
        let g = ParityGame {
            owner: vec![Player::Eve; 4],
            color: vec![7, 2, 4, 9],
            succ: vec![vec![0]; 4],
            initial: 0,
        };
        assert_eq!(g.compress_colors().color, vec![1, 0, 0, 1]);
    }
}
