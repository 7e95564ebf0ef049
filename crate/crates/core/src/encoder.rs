//! Phase-code arithmetic for the three-beam shaft encoder.
//!
//! The encoder disc produces a 6-cyclic sequence of `(C1, C2, C3)` triples.
//! Only six of the eight bit patterns occur on a healthy sensor; `(T,T,T)` and
//! `(F,F,F)` are physically impossible and indicate a sensor error.

use std::fmt;

/// One optical snapshot of the shaft encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PhaseCode {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
}

const fn code(c1: bool, c2: bool, c3: bool) -> PhaseCode {
    PhaseCode { c1, c2, c3 }
}

/// The six valid codes, in clockwise order.
pub const PHASE_TABLE: [PhaseCode; 6] = [
    code(false, false, true),
    code(true, false, true),
    code(true, false, false),
    code(true, true, false),
    code(false, true, false),
    code(false, true, true),
];

impl PhaseCode {
    pub const ALL_HIGH: PhaseCode = code(true, true, true);
    pub const ALL_LOW: PhaseCode = code(false, false, false);

    pub const fn new(c1: bool, c2: bool, c3: bool) -> Self {
        code(c1, c2, c3)
    }

    /// Packs the triple as `C1<<2 | C2<<1 | C3`.
    pub const fn bits(self) -> u8 {
        ((self.c1 as u8) << 2) | ((self.c2 as u8) << 1) | (self.c3 as u8)
    }

    pub const fn from_bits(bits: u8) -> Self {
        code(bits & 0b100 != 0, bits & 0b010 != 0, bits & 0b001 != 0)
    }

    /// Row of the phase table holding this code, if it is a valid code.
    pub fn table_index(self) -> Option<usize> {
        PHASE_TABLE.iter().position(|&c| c == self)
    }

    pub fn is_valid(self) -> bool {
        !is_code_error(self)
    }
}

impl fmt::Display for PhaseCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = |v: bool| if v { 'T' } else { 'F' };
        write!(f, "{}{}{}", b(self.c1), b(self.c2), b(self.c3))
    }
}

/// Table lookup, periodic with period 6.
pub fn phase0(n: u64) -> PhaseCode {
    PHASE_TABLE[(n % 6) as usize]
}

/// One-based view of the table: `phase(x) = phase0(x - 1)` with truncating
/// subtraction, so `phase(0) == phase(1)`.
pub fn phase(x: u64) -> PhaseCode {
    phase0(x.saturating_sub(1))
}

pub fn is_code_error(c: PhaseCode) -> bool {
    c == PhaseCode::ALL_HIGH || c == PhaseCode::ALL_LOW
}

/// Decodes one transition. The forward test takes priority over the
/// backward one; for valid codes they never both match.
///
/// `pos - 1` saturates at zero. Callers guard that case with
/// [`underflow_fault`].
pub fn next_phase0(pos: u64, code: PhaseCode) -> u64 {
    if code == phase0(pos + 1) {
        pos + 1
    } else if code == phase0(pos + 5) {
        pos.saturating_sub(1)
    } else {
        pos
    }
}

pub fn fold_positions<I>(start: u64, codes: I) -> u64
where
    I: IntoIterator<Item = PhaseCode>,
{
    codes.into_iter().fold(start, next_phase0)
}

/// True iff `cur` is neither the successor nor the predecessor of `last` in
/// the cycle. Note `cur == last` counts as a fault here.
pub fn seq_fault(last: PhaseCode, cur: PhaseCode) -> bool {
    !(0..6u64).any(|n| phase0(n) == last && (phase0(n + 1) == cur || phase0(n + 5) == cur))
}

// Row = bits(last), column bit = bits(cur); a set bit means "no fault".
const fn build_admissible() -> [u8; 8] {
    let mut table = [0u8; 8];
    let mut n = 0;
    while n < 6 {
        let last = PHASE_TABLE[n].bits() as usize;
        let fwd = PHASE_TABLE[(n + 1) % 6].bits();
        let back = PHASE_TABLE[(n + 5) % 6].bits();
        table[last] |= (1 << fwd) | (1 << back);
        n += 1;
    }
    table
}

static ADMISSIBLE: [u8; 8] = build_admissible();

/// Table-driven equivalent of [`seq_fault`].
pub fn seq_fault_table(last: PhaseCode, cur: PhaseCode) -> bool {
    ADMISSIBLE[last.bits() as usize] & (1 << cur.bits()) == 0
}

pub fn underflow_fault(count: u64, offset: u64, code: PhaseCode) -> bool {
    count == 0 && code == phase0(offset + 5)
}

/// Replays `codes` from table position `start` and checks that no code is an
/// error code, every change is a single step, and no step goes below the start.
pub fn is_valid_sequence(start: u64, codes: &[PhaseCode]) -> bool {
    let mut last = phase0(start);
    let mut pos = start;
    for &c in codes {
        if is_code_error(c) {
            return false;
        }
        if c != last && seq_fault(last, c) {
            return false;
        }
        if underflow_fault(pos - start, start % 6, c) {
            return false;
        }
        pos = next_phase0(pos, c);
        last = c;
    }
    true
}
