//! Symbol interning and the sliding-window pass shared by both miners.

use std::collections::HashMap;

use crate::model::{Event, Record, Symbol};

#[derive(Debug, Default, Clone)]
pub(crate) struct Vocabulary {
    pub symbols: Vec<Symbol>,
    ids: HashMap<Symbol, u32>,
}

impl Vocabulary {
    pub fn intern(&mut self, s: &Symbol) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(s.clone());
        self.ids.insert(s.clone(), id);
        id
    }

    pub fn id(&self, s: &Symbol) -> Option<u32> {
        self.ids.get(s).copied()
    }

    pub fn symbol(&self, id: u32) -> &Symbol {
        &self.symbols[id as usize]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }
}

pub(crate) fn intern_stream(events: &[Event]) -> (Vocabulary, Vec<u32>) {
    let mut vocab = Vocabulary::default();
    let ids = events.iter().map(|e| vocab.intern(&e.symbol)).collect();
    (vocab, ids)
}

pub(crate) fn intern_records(records: &[Record]) -> (Vocabulary, Vec<Vec<u32>>) {
    let mut vocab = Vocabulary::default();
    let rows = records
        .iter()
        .map(|r| r.symbols().iter().map(|s| vocab.intern(s)).collect())
        .collect();
    (vocab, rows)
}

pub(crate) fn pair_key(head: u32, x: u32) -> u64 {
    ((head as u64) << 32) | x as u64
}

/// Callbacks driven by [`scan_windows`].
pub(crate) trait WindowVisitor {
    /// An event enters the lookahead for the first time (each event exactly once).
    fn enter(&mut self, symbol: u32, pos: usize);
    /// Offer the occurrence at `pos` as the conclusion of `head -> x`.
    /// Return true when the rule takes it, which ends the search for this
    /// window.
    fn try_pair(&mut self, head: u32, x: u32, pos: usize) -> bool;
    /// Every distinct candidate of the window, after pairing.
    fn candidate(&mut self, head: u32, x: u32, observed: bool);
}

/// Moves a window of `ow` events over the stream in steps of one symbol.
///
/// The window starting at `i` pairs its head with every distinct symbol in
/// positions `i+1 .. i+ow`. Tail windows shorter than `ow` are processed.
pub(crate) fn scan_windows<V: WindowVisitor>(ids: &[u32], ow: usize, vocab_len: usize, v: &mut V) {
    let n = ids.len();
    let mut entered = 0usize;
    let mut stamp = 0usize;
    let mut seen = vec![0usize; vocab_len];
    let mut paired = vec![0usize; vocab_len];
    let mut candidates: Vec<(u32, bool)> = Vec::with_capacity(ow);
    for i in 0..n {
        let end = (i + ow).min(n);
        while entered < end {
            v.enter(ids[entered], entered);
            entered += 1;
        }
        stamp += 1;
        candidates.clear();
        let head = ids[i];
        for (j, &x) in ids.iter().enumerate().take(end).skip(i + 1) {
            let xi = x as usize;
            if seen[xi] != stamp {
                seen[xi] = stamp;
                candidates.push((x, false));
            }
            if paired[xi] == stamp {
                continue;
            }
            if v.try_pair(head, x, j) {
                paired[xi] = stamp;
            }
        }
        for (x, _) in candidates.iter_mut() {
            let observed = paired[*x as usize] == stamp;
            v.candidate(head, *x, observed);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[derive(Default)]
    struct Recorder {
        last: HashMap<u64, usize>,
        pairs: Vec<(u32, u32, usize)>,
        entered: Vec<usize>,
    }

    impl WindowVisitor for Recorder {
        fn enter(&mut self, _symbol: u32, pos: usize) {
            self.entered.push(pos);
        }
        fn try_pair(&mut self, head: u32, x: u32, pos: usize) -> bool {
            let last = self.last.entry(pair_key(head, x)).or_insert(usize::MAX);
            if *last != usize::MAX && pos <= *last {
                return false;
            }
            *last = pos;
            self.pairs.push((head, x, pos));
            true
        }
        fn candidate(&mut self, _: u32, _: u32, _: bool) {}
    }

    #[test]
    fn each_event_enters_once() {
        let ids = [0, 1, 0, 2, 1, 1, 0];
        let mut r = Recorder::default();
        scan_windows(&ids, 3, 3, &mut r);
        assert_eq!(r.entered, (0..ids.len()).collect::<Vec<_>>());
    }

    #[test]
    fn conclusion_occurrence_paired_at_most_once_per_rule() {
        // [a, a, b]: both windows headed by `a` see the same `b`
        let ids = [0, 0, 1];
        let mut r = Recorder::default();
        scan_windows(&ids, 3, 2, &mut r);
        let ab: Vec<_> = r.pairs.iter().filter(|p| p.0 == 0 && p.1 == 1).collect();
        assert_eq!(ab.len(), 1);
        let unique: HashSet<_> = r.pairs.iter().collect();
        assert_eq!(unique.len(), r.pairs.len());
    }
}
