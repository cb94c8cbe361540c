//! Regex → automaton compilation: Thompson NFA, subset construction and
//! partition-refinement minimization. All automata are over the seven-symbol
//! mode alphabet.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::mode::ModeLabel;
use crate::modelang::regex::ModeRegex;

const SIGMA: usize = ModeLabel::ALL.len();

/// Thompson NFA with epsilon moves. State 0.. are dense indices.
#[derive(Clone, Debug)]
pub struct Nfa {
    eps: Vec<Vec<usize>>,
    moves: Vec<Vec<(ModeLabel, usize)>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    pub fn thompson(regex: &ModeRegex) -> Nfa {
        let mut nfa = Nfa { eps: Vec::new(), moves: Vec::new(), start: 0, accept: 0 };
        let (s, a) = nfa.build(regex);
        nfa.start = s;
        nfa.accept = a;
        nfa
    }

    pub fn state_count(&self) -> usize {
        self.eps.len()
    }

    fn add_state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.moves.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &ModeRegex) -> (usize, usize) {
        match r {
            ModeRegex::Symbol(m) => {
                let s = self.add_state();
                let a = self.add_state();
                self.moves[s].push((*m, a));
                (s, a)
            }
            ModeRegex::Concat(parts) => {
                let mut frags = parts.iter().map(|p| self.build(p)).collect::<Vec<_>>().into_iter();
                let (start, mut end) = frags.next().expect("concat is non-empty");
                for (s, a) in frags {
                    self.eps[end].push(s);
                    end = a;
                }
                (start, end)
            }
            ModeRegex::Alt(branches) => {
                let s = self.add_state();
                let a = self.add_state();
                for b in branches {
                    let (bs, ba) = self.build(b);
                    self.eps[s].push(bs);
                    self.eps[ba].push(a);
                }
                (s, a)
            }
            ModeRegex::Star(inner) => {
                let s = self.add_state();
                let a = self.add_state();
                let (is, ia) = self.build(inner);
                self.eps[s].extend([is, a]);
                self.eps[ia].extend([is, a]);
                (s, a)
            }
            ModeRegex::Plus(inner) => {
                let s = self.add_state();
                let a = self.add_state();
                let (is, ia) = self.build(inner);
                self.eps[s].push(is);
                self.eps[ia].extend([is, a]);
                (s, a)
            }
        }
    }

    fn closure(&self, seed: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = seed.into_iter().collect();
        while let Some(s) = stack.pop() {
            if out.insert(s) {
                stack.extend(self.eps[s].iter().copied());
            }
        }
        out
    }

    /// Direct NFA simulation; an independent route to membership.
    pub fn accepts(&self, word: &[ModeLabel]) -> bool {
        let mut cur = self.closure([self.start]);
        for &m in word {
            let next = cur
                .iter()
                .flat_map(|&s| self.moves[s].iter().filter(|(l, _)| *l == m).map(|&(_, t)| t));
            cur = self.closure(next);
            if cur.is_empty() {
                return false;
            }
        }
        cur.contains(&self.accept)
    }
}

/// Total deterministic automaton over the mode alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeDfa {
    transitions: Vec<[u32; SIGMA]>,
    accepting: Vec<bool>,
    live: Vec<bool>,
    start: u32,
}

impl ModeDfa {
    /// Subset construction. The result is total: the empty subset becomes an
    /// explicit dead state when any transition needs it.
    pub fn from_nfa(nfa: &Nfa) -> ModeDfa {
        let mut ids: BTreeMap<BTreeSet<usize>, u32> = BTreeMap::new();
        let mut sets: Vec<BTreeSet<usize>> = Vec::new();
        let mut transitions: Vec<[u32; SIGMA]> = Vec::new();
        let mut queue = VecDeque::new();

        let start = nfa.closure([nfa.start]);
        ids.insert(start.clone(), 0);
        sets.push(start);
        queue.push_back(0u32);
        while let Some(id) = queue.pop_front() {
            let mut row = [0u32; SIGMA];
            for m in ModeLabel::ALL {
                let targets = sets[id as usize].iter().flat_map(|&s| {
                    nfa.moves[s].iter().filter(move |(l, _)| *l == m).map(|&(_, t)| t)
                });
                let next = nfa.closure(targets);
                let next_id = match ids.get(&next) {
                    Some(&n) => n,
                    None => {
                        let n = sets.len() as u32;
                        ids.insert(next.clone(), n);
                        sets.push(next);
                        queue.push_back(n);
                        n
                    }
                };
                row[m.index()] = next_id;
            }
            if transitions.len() <= id as usize {
                transitions.resize(id as usize + 1, [0; SIGMA]);
            }
            transitions[id as usize] = row;
        }
        let accepting = sets.iter().map(|s| s.contains(&nfa.accept)).collect();
        ModeDfa::with_liveness(transitions, accepting, 0)
    }

    fn with_liveness(transitions: Vec<[u32; SIGMA]>, accepting: Vec<bool>, start: u32) -> ModeDfa {
        let n = transitions.len();
        let mut reverse = vec![Vec::new(); n];
        for (s, row) in transitions.iter().enumerate() {
            for &t in row {
                reverse[t as usize].push(s);
            }
        }
        let mut live = accepting.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&s| accepting[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &reverse[s] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        ModeDfa { transitions, accepting, live, start }
    }

    /// Moore partition refinement, then renumbering in breadth-first order
    /// from the start state so equal languages give identical tables.
    pub fn minimize(&self) -> ModeDfa {
        let n = self.state_count();
        let mut class: Vec<u32> = self.accepting.iter().map(|&a| u32::from(a)).collect();
        let mut n_classes = class.iter().collect::<BTreeSet<_>>().len();
        loop {
            let mut sig_ids: BTreeMap<(u32, [u32; SIGMA]), u32> = BTreeMap::new();
            let mut next = vec![0u32; n];
            for s in 0..n {
                let mut sig = [0u32; SIGMA];
                for (k, &t) in self.transitions[s].iter().enumerate() {
                    sig[k] = class[t as usize];
                }
                let len = sig_ids.len() as u32;
                next[s] = *sig_ids.entry((class[s], sig)).or_insert(len);
            }
            let refined = sig_ids.len();
            class = next;
            if refined == n_classes {
                break;
            }
            n_classes = refined;
        }

        let mut order: BTreeMap<u32, u32> = BTreeMap::new();
        let mut queue = VecDeque::from([class[self.start as usize]]);
        let mut representative: BTreeMap<u32, usize> = BTreeMap::new();
        for s in 0..n {
            representative.entry(class[s]).or_insert(s);
        }
        order.insert(class[self.start as usize], 0);
        let mut transitions = Vec::new();
        let mut accepting = Vec::new();
        while let Some(c) = queue.pop_front() {
            let rep = representative[&c];
            let mut row = [0u32; SIGMA];
            for (k, &t) in self.transitions[rep].iter().enumerate() {
                let tc = class[t as usize];
                let len = order.len() as u32;
                row[k] = *order.entry(tc).or_insert_with(|| {
                    queue.push_back(tc);
                    len
                });
            }
            transitions.push(row);
            accepting.push(self.accepting[rep]);
        }
        ModeDfa::with_liveness(transitions, accepting, 0)
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn step(&self, state: u32, m: ModeLabel) -> u32 {
        self.transitions[state as usize][m.index()]
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    /// False when no accepting state is reachable from `state`.
    pub fn is_live(&self, state: u32) -> bool {
        self.live[state as usize]
    }

    pub fn accepts(&self, word: &[ModeLabel]) -> bool {
        let s = word.iter().fold(self.start, |s, &m| self.step(s, m));
        self.is_accepting(s)
    }
}

/// Thompson construction, subset construction, then minimization.
pub fn compile_dfa(regex: &ModeRegex) -> ModeDfa {
    ModeDfa::from_nfa(&Nfa::thompson(regex)).minimize()
}
