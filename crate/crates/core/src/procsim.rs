//! Bulk-synchronous runtime for `p` logical processes.
//!
//! Every rank runs the same program on its own thread and interacts with the
//! others only through [`Comm::exchange`], a collective superstep that delivers
//! all messages posted by the group at once. Incoming messages are sorted by
//! source rank and then by send order, so a program's outcome never depends on
//! thread timing. Under [`Schedule::Sequential`] at most one rank executes at a
//! time; the baton always goes to the lowest ready rank.
//!
//! Groups are split recursively (first half gets `ceil(p/2)` ranks) and every
//! group owns a seed from which each rank derives independent random streams.

use std::cell::Cell;
use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How ranks are mapped onto OS threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Ranks run concurrently.
    #[default]
    Parallel,
    /// Ranks run one at a time, round-robin by rank between supersteps.
    Sequential,
}

/// A point-to-point message carried by one superstep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub source: usize,
    pub dest: usize,
    pub tag: u32,
    pub payload: Vec<u8>,
}

impl Message {
    /// Builds an outgoing message; the source is filled in by `exchange`.
    pub fn new(dest: usize, tag: u32, payload: Vec<u8>) -> Self {
        Message { source: usize::MAX, dest, tag, payload }
    }

    pub fn words(dest: usize, tag: u32, words: &[u64]) -> Self {
        Message::new(dest, tag, encode_words(words))
    }

    pub fn to_words(&self) -> Vec<u64> {
        decode_words(&self.payload)
    }
}

pub fn encode_words(words: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(words.len() * 8);
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode_words(bytes: &[u8]) -> Vec<u64> {
    bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

/// Sizes of the two halves produced by splitting a group of `p` ranks.
pub fn split_sizes(p: usize) -> (usize, usize) {
    (p.div_ceil(2), p / 2)
}

/// SplitMix64 finalizer, used to derive seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive(seed: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(seed ^ mix64(a)) ^ mix64(b.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Description of a top-level process group to run a program on.
#[derive(Debug, Clone, Copy)]
pub struct ProcGroup {
    pub size: usize,
    pub seed: u64,
    pub schedule: Schedule,
}

impl ProcGroup {
    pub fn new(size: usize, seed: u64) -> Self {
        assert!(size >= 1, "a process group needs at least one rank");
        ProcGroup { size, seed, schedule: Schedule::Parallel }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Runs `program` on every rank and returns the per-rank results in rank order.
    ///
    /// If any rank fails (error, panic, deadlock) the whole run fails with the
    /// first recorded cause.
    pub fn run<R, F>(&self, program: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Comm) -> Result<R> + Sync,
    {
        let rt = Arc::new(Runtime::new(self.size, self.seed, self.schedule));
        let program = &program;
        let outcomes: Vec<Option<R>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..self.size)
                .map(|rank| {
                    let rt = Arc::clone(&rt);
                    s.spawn(move || rt.run_rank(rank, program))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("rank thread cannot panic outside catch_unwind"))
                .collect()
        });
        let state = rt.lock();
        if let Some(err) = &state.abort {
            return Err(err.clone());
        }
        drop(state);
        Ok(outcomes
            .into_iter()
            .map(|o| o.expect("no abort recorded, so every rank returned a value"))
            .collect())
    }
}

struct GroupState {
    size: usize,
    seed: u64,
    pending: Vec<Option<Vec<Message>>>,
    arrived: usize,
    generation: u64,
    inbox: Vec<Option<Vec<Message>>>,
    children: HashMap<u64, [usize; 2]>,
}

impl GroupState {
    fn new(size: usize, seed: u64) -> Self {
        GroupState {
            size,
            seed,
            pending: vec![None; size],
            arrived: 0,
            generation: 0,
            inbox: vec![None; size],
            children: HashMap::new(),
        }
    }
}

struct State {
    groups: Vec<GroupState>,
    running: usize,
    blocked: usize,
    abort: Option<Error>,
    baton: Option<usize>,
    waiting: BTreeSet<usize>,
}

struct Runtime {
    state: Mutex<State>,
    cv: Condvar,
    schedule: Schedule,
}

impl Runtime {
    fn new(size: usize, seed: u64, schedule: Schedule) -> Self {
        Runtime {
            state: Mutex::new(State {
                groups: vec![GroupState::new(size, seed)],
                running: size,
                blocked: 0,
                abort: None,
                baton: None,
                waiting: BTreeSet::new(),
            }),
            cv: Condvar::new(),
            schedule,
        }
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn acquire_baton<'a>(&'a self, mut st: MutexGuard<'a, State>, tid: usize) -> MutexGuard<'a, State> {
        if self.schedule == Schedule::Parallel {
            return st;
        }
        st.waiting.insert(tid);
        loop {
            if st.abort.is_some() {
                st.waiting.remove(&tid);
                return st;
            }
            if st.baton.is_none() && st.waiting.first() == Some(&tid) {
                st.waiting.remove(&tid);
                st.baton = Some(tid);
                return st;
            }
            st = self.cv.wait(st).unwrap_or_else(|e| e.into_inner());
        }
    }

    fn release_baton(&self, st: &mut State, tid: usize) {
        if st.baton == Some(tid) {
            st.baton = None;
            self.cv.notify_all();
        }
    }

    fn abort(&self, st: &mut State, err: Error) {
        if st.abort.is_none() {
            st.abort = Some(err);
        }
        self.cv.notify_all();
    }

    fn run_rank<R, F>(self: &Arc<Self>, rank: usize, program: &F) -> Option<R>
    where
        F: Fn(&Comm) -> Result<R>,
    {
        let st = self.lock();
        let seed = st.groups[0].seed;
        let size = st.groups[0].size;
        let st = self.acquire_baton(st, rank);
        drop(st);
        let comm = Comm {
            rt: Arc::clone(self),
            gid: 0,
            rank,
            size,
            tid: rank,
            seed,
            counters: Rc::new(Counters::default()),
        };
        let outcome = catch_unwind(AssertUnwindSafe(|| program(&comm)));
        let mut st = self.lock();
        st.running -= 1;
        self.release_baton(&mut st, rank);
        let value = match outcome {
            Ok(Ok(v)) => Some(v),
            Ok(Err(e)) => {
                self.abort(&mut st, e);
                None
            }
            Err(panic) => {
                let message = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "panic".to_string());
                self.abort(&mut st, Error::RankPanicked { rank, message });
                None
            }
        };
        if st.running == 0 && st.blocked > 0 {
            let diag = deadlock_diagnostic(&st);
            self.abort(&mut st, Error::Deadlock(diag));
        }
        self.cv.notify_all();
        value
    }
}

fn deadlock_diagnostic(st: &State) -> String {
    let waiting: Vec<String> = st
        .groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.arrived > 0)
        .map(|(i, g)| format!("group {i}: {}/{} ranks arrived", g.arrived, g.size))
        .collect();
    format!(
        "{} rank(s) blocked in exchange with no rank left to complete it ({})",
        st.blocked,
        waiting.join(", ")
    )
}

#[derive(Default)]
struct Counters {
    splits: Cell<u64>,
    streams: Cell<u64>,
}

/// A rank's handle on its current process group.
///
/// Clones share the split and random-stream counters, so any clone can be
/// used interchangeably as long as all ranks issue the same collective calls.
#[derive(Clone)]
pub struct Comm {
    rt: Arc<Runtime>,
    gid: usize,
    rank: usize,
    size: usize,
    tid: usize,
    seed: u64,
    counters: Rc<Counters>,
}

impl std::fmt::Debug for Comm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Comm")
            .field("rank", &self.rank)
            .field("size", &self.size)
            .field("seed", &self.seed)
            .finish()
    }
}

impl Comm {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rank of this thread in the top-level group.
    pub fn world_rank(&self) -> usize {
        self.tid
    }

    /// A fresh random stream, a pure function of (group seed, rank, call count).
    pub fn rng(&self) -> ChaCha8Rng {
        let n = self.counters.streams.get();
        self.counters.streams.set(n + 1);
        ChaCha8Rng::seed_from_u64(derive(self.seed, self.rank as u64, n))
    }

    /// One superstep: posts `outgoing` and returns everything addressed to this rank.
    pub fn exchange(&self, outgoing: Vec<Message>) -> Result<Vec<Message>> {
        let mut st = self.rt.lock();
        if let Some(err) = &st.abort {
            return Err(err.clone());
        }
        if let Some(m) = outgoing.iter().find(|m| m.dest >= self.size) {
            let err = Error::BadDestination { dest: m.dest, size: self.size };
            self.rt.abort(&mut st, err.clone());
            return Err(err);
        }
        let rank = self.rank;
        let outgoing = outgoing
            .into_iter()
            .map(|mut m| {
                m.source = rank;
                m
            })
            .collect();
        let group = &mut st.groups[self.gid];
        debug_assert!(group.pending[rank].is_none());
        group.pending[rank] = Some(outgoing);
        group.arrived += 1;

        if group.arrived == group.size {
            let mut inbox: Vec<Vec<Message>> = vec![Vec::new(); group.size];
            for slot in group.pending.iter_mut() {
                for m in slot.take().unwrap_or_default() {
                    inbox[m.dest].push(m);
                }
            }
            for (slot, msgs) in group.inbox.iter_mut().zip(inbox) {
                *slot = Some(msgs);
            }
            group.arrived = 0;
            group.generation += 1;
            let woken = group.size - 1;
            let mine = group.inbox[rank].take().unwrap_or_default();
            st.running += woken;
            st.blocked -= woken;
            self.rt.cv.notify_all();
            return Ok(mine);
        }

        let generation = group.generation;
        st.blocked += 1;
        st.running -= 1;
        self.rt.release_baton(&mut st, self.tid);
        if st.running == 0 {
            let diag = deadlock_diagnostic(&st);
            self.rt.abort(&mut st, Error::Deadlock(diag));
        }
        loop {
            if st.groups[self.gid].generation != generation {
                break;
            }
            if let Some(err) = st.abort.clone() {
                st.blocked -= 1;
                st.running += 1;
                return Err(err);
            }
            st = self.rt.cv.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        let mine = st.groups[self.gid].inbox[rank].take().unwrap_or_default();
        let st = self.rt.acquire_baton(st, self.tid);
        if let Some(err) = &st.abort {
            return Err(err.clone());
        }
        Ok(mine)
    }

    /// Splits the group; returns which half (0 or 1) this rank joined and its new handle.
    pub fn split(&self) -> Result<(usize, Comm)> {
        if self.size < 2 {
            return Err(Error::GroupTooSmall(self.size));
        }
        let key = self.counters.splits.get();
        self.counters.splits.set(key + 1);
        let (first, second) = split_sizes(self.size);
        let mut st = self.rt.lock();
        let parent_seed = st.groups[self.gid].seed;
        let existing = st.groups[self.gid].children.get(&key).copied();
        let ids = match existing {
            Some(ids) => ids,
            None => {
                let a = st.groups.len();
                st.groups.push(GroupState::new(first, derive(parent_seed, key, 1)));
                st.groups.push(GroupState::new(second, derive(parent_seed, key, 2)));
                st.groups[self.gid].children.insert(key, [a, a + 1]);
                [a, a + 1]
            }
        };
        let (side, rank, size) = if self.rank < first {
            (0, self.rank, first)
        } else {
            (1, self.rank - first, second)
        };
        let seed = st.groups[ids[side]].seed;
        Ok((
            side,
            Comm {
                rt: Arc::clone(&self.rt),
                gid: ids[side],
                rank,
                size,
                tid: self.tid,
                seed,
                counters: Rc::new(Counters::default()),
            },
        ))
    }

    /// Every rank contributes a payload; all ranks get all payloads in rank order.
    pub fn all_gather(&self, tag: u32, payload: Vec<u8>) -> Result<Vec<Vec<u8>>> {
        let outgoing = (0..self.size).map(|d| Message::new(d, tag, payload.clone())).collect();
        let incoming = self.exchange(outgoing)?;
        Ok(incoming.into_iter().map(|m| m.payload).collect())
    }

    pub fn all_gather_words(&self, tag: u32, words: &[u64]) -> Result<Vec<Vec<u64>>> {
        Ok(self
            .all_gather(tag, encode_words(words))?
            .iter()
            .map(|p| decode_words(p))
            .collect())
    }

    /// Element-wise sum across ranks.
    pub fn all_reduce_sum(&self, tag: u32, values: &[i64]) -> Result<Vec<i64>> {
        let words: Vec<u64> = values.iter().map(|&v| v as u64).collect();
        let all = self.all_gather_words(tag, &words)?;
        let mut sum = vec![0i64; values.len()];
        for row in all {
            for (s, w) in sum.iter_mut().zip(row) {
                *s = s.wrapping_add(w as i64);
            }
        }
        Ok(sum)
    }

    /// Sends `payload` from `root` to every rank.
    pub fn broadcast(&self, tag: u32, root: usize, payload: Vec<u8>) -> Result<Vec<u8>> {
        let outgoing = if self.rank == root {
            (0..self.size).map(|d| Message::new(d, tag, payload.clone())).collect()
        } else {
            Vec::new()
        };
        let mut incoming = self.exchange(outgoing)?;
        incoming
            .pop()
            .map(|m| m.payload)
            .ok_or_else(|| Error::Invariant("broadcast delivered nothing".into()))
    }
}
