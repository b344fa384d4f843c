//! Gallager's hard-decision decoder for (s,t)-regular LDPC codes.
//!
//! The code is held as its Tanner graph: `checks[j]` lists the variables of
//! check `j` and `var_checks[i]` the checks containing variable `i`. Every
//! incidence `(i, j)` gets one slot in a flat edge array so that the two
//! message directions can live in plain `Vec<u8>` buffers.

use rand::Rng;

use crate::error::{param, Error, Result};
use crate::rng::{self, Stream};

/// Re-pairing attempts allowed per conflicting stub before giving up.
pub const REPAIR_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdpcCode {
    n: usize,
    s: usize,
    t: usize,
    checks: Vec<Vec<usize>>,
    /// Per variable: `(check, edge slot)` pairs, checks ascending.
    var_edges: Vec<Vec<(usize, usize)>>,
    /// Start of each check's slots in the flat edge array.
    check_offsets: Vec<usize>,
}

/// A binary word; every entry is 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return param("word entries must be 0 or 1");
        }
        Ok(Word(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Word(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn hamming_distance(&self, other: &Word) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl LdpcCode {
    /// Builds a code from its check lists and validates (s,t)-regularity.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let r = checks.len();
        let t = checks.first().map_or(0, Vec::len);
        let mut var_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut check_offsets = Vec::with_capacity(r + 1);
        let mut slot = 0;
        for (j, vars) in checks.iter().enumerate() {
            check_offsets.push(slot);
            if vars.len() != t {
                return param(format!(
                    "check {j} has {} variables, expected {t}",
                    vars.len()
                ));
            }
            for (pos, &i) in vars.iter().enumerate() {
                if i >= n {
                    return param(format!("check {j} names variable {i} >= n = {n}"));
                }
                if vars[..pos].contains(&i) {
                    return param(format!("check {j} repeats variable {i}"));
                }
                var_edges[i].push((j, slot));
                slot += 1;
            }
        }
        check_offsets.push(slot);
        let s = var_edges.first().map_or(0, Vec::len);
        if let Some(i) = var_edges.iter().position(|e| e.len() != s) {
            return param(format!(
                "variable {i} is in {} checks, expected {s}",
                var_edges[i].len()
            ));
        }
        Ok(LdpcCode {
            n,
            s,
            t,
            checks,
            var_edges,
            check_offsets,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.checks.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn check(&self, j: usize) -> &[usize] {
        &self.checks[j]
    }

    /// Checks containing variable `i`, ascending.
    pub fn variable_checks(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.var_edges[i].iter().map(|&(j, _)| j)
    }

    pub fn edge_count(&self) -> usize {
        self.check_offsets[self.r()]
    }

    /// Re-derives the degree invariants from the incidence lists.
    pub fn validate(&self) -> Result<()> {
        if self.n * self.s != self.r() * self.t || self.edge_count() != self.n * self.s {
            return param("incidence size does not equal n*s = r*t");
        }
        let rebuilt = LdpcCode::from_checks(self.n, self.checks.clone())?;
        if rebuilt.s != self.s || rebuilt.t != self.t {
            return param("degree bookkeeping is inconsistent");
        }
        Ok(())
    }
}

/// Random (s,t)-regular code from the configuration model.
///
/// `n·s` variable stubs are shuffled and dealt to the `r·t` check stubs.
/// A variable landing twice in the same check is swapped with a uniformly
/// drawn stub elsewhere, provided the swap leaves both checks free of
/// repeats; each conflict gets [`REPAIR_ATTEMPTS`] draws.
pub fn generate_regular_code(n: usize, s: usize, t: usize, seed: u64) -> Result<LdpcCode> {
    if n == 0 || s == 0 || t == 0 {
        return param("n, s and t must all be positive");
    }
    if !(n * s).is_multiple_of(t) {
        return param(format!("n*s = {} is not divisible by t = {t}", n * s));
    }
    if t > n {
        return param(format!("check degree {t} exceeds n = {n}"));
    }
    let r = n * s / t;
    let mut rng = rng::stream_rng(seed, Stream::CodeConstruction);
    let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, s)).collect();
    rng::shuffle(&mut rng, &mut stubs);

    let total = stubs.len();
    let repeats_at = |stubs: &[usize], pos: usize| -> bool {
        let j = pos / t;
        let block = &stubs[j * t..(j + 1) * t];
        block.iter().filter(|&&v| v == stubs[pos]).count() > 1
    };
    // would `var` collide with the other members of check `j` (ignoring `skip`)?
    let collides = |stubs: &[usize], j: usize, skip: usize, var: usize| -> bool {
        (j * t..(j + 1) * t).any(|q| q != skip && stubs[q] == var)
    };

    for pos in 0..total {
        if !repeats_at(&stubs, pos) {
            continue;
        }
        let mut fixed = false;
        for _ in 0..REPAIR_ATTEMPTS {
            let other = rng::index(&mut rng, total);
            let (a, b) = (stubs[pos], stubs[other]);
            let (ja, jb) = (pos / t, other / t);
            if ja == jb || a == b {
                continue;
            }
            if !collides(&stubs, ja, pos, b) && !collides(&stubs, jb, other, a) {
                stubs.swap(pos, other);
                fixed = true;
                break;
            }
        }
        if !fixed {
            return Err(Error::Parameter(format!(
                "configuration model re-pairing failed after {REPAIR_ATTEMPTS} attempts"
            )));
        }
    }

    let checks: Vec<Vec<usize>> = stubs.chunks(t).map(<[usize]>::to_vec).collect();
    debug_assert_eq!(checks.len(), r);
    let code = LdpcCode::from_checks(n, checks)?;
    code.validate()?;
    Ok(code)
}

/// True iff every check XORs to zero.
pub fn is_codeword(code: &LdpcCode, w: &Word) -> bool {
    assert_eq!(code.n(), w.len(), "word length differs from code length");
    code.checks()
        .iter()
        .all(|vars| vars.iter().fold(0u8, |acc, &i| acc ^ w.bits()[i]) == 0)
}

/// Toggles exactly `flips` distinct, uniformly chosen positions.
pub fn bsc_corrupt(w: &Word, flips: usize, seed: u64) -> Result<Word> {
    if flips > w.len() {
        return param(format!("cannot flip {flips} of {} bits", w.len()));
    }
    let mut rng = rng::stream_rng(seed, Stream::Channel);
    let mut bits = w.bits().to_vec();
    for i in rng::sample_distinct(&mut rng, bits.len(), flips) {
        bits[i] ^= 1;
    }
    Ok(Word(bits))
}

/// Flips each bit independently with probability `q` (the classical BSC).
pub fn bsc_transmit(w: &Word, q: f64, seed: u64) -> Result<Word> {
    if !(0.0..=1.0).contains(&q) {
        return param(format!("crossover probability {q} outside [0, 1]"));
    }
    let mut rng = rng::stream_rng(seed, Stream::Channel);
    Ok(Word(
        w.bits()
            .iter()
            .map(|&b| if rng.gen::<f64>() < q { b ^ 1 } else { b })
            .collect(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    pub word: Word,
    /// Sweeps executed; when converged, the sweep that changed nothing.
    pub iterations: usize,
    pub status: DecodeStatus,
    /// Variable-to-check messages changed per sweep.
    pub changed_messages: Vec<usize>,
}

/// Binary variable rule shared by the outgoing messages and the final
/// decision: `b` when at least `tau` votes say `b` and the other value does
/// not also reach `tau`; otherwise the received bit.
pub fn variable_vote(votes: [usize; 2], received: u8, tau: usize) -> u8 {
    match (votes[0] >= tau, votes[1] >= tau) {
        (true, false) => 0,
        (false, true) => 1,
        _ => received,
    }
}

/// Check-to-variable message: XOR of the other incoming variable messages.
pub fn check_message(others: &[u8]) -> u8 {
    others.iter().fold(0, |acc, &b| acc ^ b)
}

/// Gallager's hard-decision decoder with synchronous two-buffer sweeps.
///
/// Variable-to-check messages start at the received bits. One sweep
/// recomputes every check-to-variable message from the previous
/// variable-to-check buffer, then every variable-to-check message from the
/// fresh check buffer. Decoding stops at the first sweep in which no
/// variable-to-check message changed, or after `max_iters` sweeps.
pub fn ldpc_decode(
    code: &LdpcCode,
    received: &Word,
    tau: usize,
    max_iters: usize,
) -> Result<DecodeOutcome> {
    if tau == 0 {
        return param("tau must be at least 1");
    }
    if received.len() != code.n() {
        return param(format!(
            "received word has {} bits, code length is {}",
            received.len(),
            code.n()
        ));
    }
    let alpha = received.bits();
    let edges = code.edge_count();
    let mut var_to_check = vec![0u8; edges];
    for (j, vars) in code.checks().iter().enumerate() {
        for (pos, &i) in vars.iter().enumerate() {
            var_to_check[code.check_offsets[j] + pos] = alpha[i];
        }
    }
    let mut check_to_var = vec![0u8; edges];
    let mut next = vec![0u8; edges];
    let mut changed_messages = Vec::new();
    let mut status = DecodeStatus::MaxIters;

    for _ in 0..max_iters {
        for j in 0..code.r() {
            let range = code.check_offsets[j]..code.check_offsets[j + 1];
            let parity = check_message(&var_to_check[range.clone()]);
            for e in range {
                check_to_var[e] = parity ^ var_to_check[e];
            }
        }
        for (incident, &own) in code.var_edges.iter().zip(alpha) {
            let mut total = [0usize; 2];
            for &(_, e) in incident {
                total[check_to_var[e] as usize] += 1;
            }
            for &(_, e) in incident {
                let mut votes = total;
                votes[check_to_var[e] as usize] -= 1;
                next[e] = variable_vote(votes, own, tau);
            }
        }
        let changed = next
            .iter()
            .zip(&var_to_check)
            .filter(|(a, b)| a != b)
            .count();
        std::mem::swap(&mut var_to_check, &mut next);
        changed_messages.push(changed);
        if changed == 0 {
            status = DecodeStatus::Converged;
            break;
        }
    }

    // B_i over the latest check messages
    let bits = (0..code.n())
        .map(|i| {
            let mut votes = [0usize; 2];
            for &(_, e) in &code.var_edges[i] {
                votes[check_to_var[e] as usize] += 1;
            }
            variable_vote(votes, alpha[i], tau)
        })
        .collect();

    Ok(DecodeOutcome {
        word: Word(bits),
        iterations: changed_messages.len(),
        status,
        changed_messages,
    })
}
