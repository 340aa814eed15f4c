//! Small hand-made games shared by tests and the command line.

use crate::structures::Cgs;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Agent `b` picks a bit in the first round, then agent `a` must repeat it.
/// Positions `init, bit0, bit1, win, lose`; `match` holds at `win`.
pub fn hidden_bit() -> Cgs {
    // positions: init, bit0, bit1, win, lose ; actions 0/1
    let mut transition = Vec::new();
    let jc = 4;
    let step = |v: usize, ca: usize, cb: usize| -> usize {
        match v {
            0 => 1 + cb,
            1 | 2 => {
                if ca == v - 1 {
                    3
                } else {
                    4
                }
            }
            w => w,
        }
    };
    for v in 0..5 {
        for c in 0..jc {
            transition.push(Some(step(v, c / 2, c % 2)));
        }
    }
    let mut labels = vec![BTreeSet::new(); 5];
    labels[3].insert("match".to_string());
    Cgs {
        agents: vec!["a".into(), "b".into()],
        actions: vec!["0".into(), "1".into()],
        positions: vec!["init".into(), "bit0".into(), "bit1".into(), "win".into(), "lose".into()],
        transition,
        labels,
        initial: 0,
        obs: [("blind".to_string(), vec![0; 5])].into_iter().collect(),
    }
}

/// Two agents `a1, a2` with actions `h, t` play one round, then the play
/// stays in a sink per joint action labelled by `win(action1, action2)`.
pub fn one_shot(win: impl Fn(usize, usize) -> Vec<&'static str>) -> Cgs {
    let mut labels = vec![BTreeSet::new()];
    let mut transition = vec![];
    for c in 0..4 {
        transition.push(Some(1 + c));
    }
    for c in 0..4 {
        labels.push(win(c / 2, c % 2).into_iter().map(|s| s.to_string()).collect());
    }
    for v in 1..5 {
        for _ in 0..4 {
            transition.push(Some(v));
        }
    }
    Cgs {
        agents: vec!["a1".into(), "a2".into()],
        actions: vec!["h".into(), "t".into()],
        positions: (0..5).map(|i| format!("v{i}")).collect(),
        transition,
        labels,
        initial: 0,
        obs: BTreeMap::new(),
    }
}

/// `win1` when the coins agree, `win2` otherwise.
pub fn matching_pennies() -> Cgs {
    one_shot(|a, b| if a == b { vec!["win1"] } else { vec!["win2"] })
}

/// `agree` when both pick the same side.
pub fn coordination() -> Cgs {
    one_shot(|a, b| if a == b { vec!["agree"] } else { vec![] })
}
