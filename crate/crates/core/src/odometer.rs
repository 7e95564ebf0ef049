//! The discrete odometric state machine.
//!
//! [`odo_step`] consumes one encoder sample and produces the output record and
//! the successor state. Position, status and validity follow the decoded
//! encoder transitions; speed is the position-count difference across the
//! averaging window; acceleration and jerk are the same difference one and
//! two orders up.

use std::collections::VecDeque;

use crate::config::{OdoConfig, Rational};
use crate::encoder::{is_code_error, phase0, seq_fault, underflow_fault, PhaseCode};
use crate::word::{IWord32, Word32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OdoInput {
    pub encoder: PhaseCode,
    /// Asserted while the train passes a trackside marker.
    pub marker: bool,
}

impl OdoInput {
    pub fn encoder(code: PhaseCode) -> Self {
        OdoInput { encoder: code, marker: false }
    }
}

impl From<PhaseCode> for OdoInput {
    fn from(code: PhaseCode) -> Self {
        OdoInput::encoder(code)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdoState {
    /// Most recent first; always `n_avg` long.
    pub samples: VecDeque<PhaseCode>,
    /// Most recent first; always `n_avg` long.
    pub position_count_queue: VecDeque<Word32>,
    pub odometer_status: bool,
    pub odometric_position_valid: bool,
    pub odometric_position_count: Word32,
    pub odometric_position_timestamp: Word32,
    /// Table row of the initial code, `0..6`.
    pub offset: u8,
    // Extension fields: marker latch and derivative histories.
    pub last_marker_position: Word32,
    pub last_marker_timestamp: Word32,
    pub speed_history: VecDeque<IWord32>,
    pub accel_history: VecDeque<IWord32>,
}

impl OdoState {
    pub fn window_len(&self) -> usize {
        self.samples.len()
    }

    pub fn invariants_hold(&self, n_avg: usize) -> bool {
        self.samples.len() == n_avg
            && self.position_count_queue.len() == n_avg
            && self.speed_history.len() == n_avg
            && self.accel_history.len() == n_avg
            && self.offset < 6
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OdoOutput {
    pub odometer_status: bool,
    pub odometric_position_valid: bool,
    pub odometric_position_count: Word32,
    pub odometric_position_timestamp: Word32,
    pub last_marker_position: Word32,
    pub last_marker_timestamp: Word32,
    /// Millimeters.
    pub relative_position: Word32,
    pub speed: IWord32,
    pub acceleration: IWord32,
    pub jerk: IWord32,
    pub cinematics_timestamp: Word32,
}

/// Initial state for an encoder resting on table row `n`.
pub fn mk_init(n: u64, config: &OdoConfig) -> OdoState {
    let len = config.n_avg;
    OdoState {
        samples: VecDeque::from(vec![phase0(n); len]),
        position_count_queue: VecDeque::from(vec![Word32::ZERO; len]),
        odometer_status: true,
        odometric_position_valid: true,
        odometric_position_count: Word32::ZERO,
        odometric_position_timestamp: Word32::ZERO,
        offset: (n % 6) as u8,
        last_marker_position: Word32::ZERO,
        last_marker_timestamp: Word32::ZERO,
        speed_history: VecDeque::from(vec![IWord32::default(); len]),
        accel_history: VecDeque::from(vec![IWord32::default(); len]),
    }
}

/// Word-level transition decoding. The table row is taken from the unsigned
/// value of `pos`; the result wraps modulo 2³².
pub fn next_phase_word(pos: Word32, code: PhaseCode) -> Word32 {
    let p = pos.0 as u64;
    if code == phase0(p + 1) {
        pos + Word32(1)
    } else if code == phase0(p + 5) {
        pos - Word32(1)
    } else {
        pos
    }
}

/// `⌊r + 1/2⌋`.
pub fn round_half_up(r: Rational) -> i128 {
    (r + Rational::new(1, 2)).floor().to_integer()
}

fn push_window<T>(queue: &mut VecDeque<T>, value: T, len: usize) {
    queue.push_front(value);
    queue.truncate(len);
}

/// One step of the odometer. Never returns `None`; the option mirrors the
/// monadic step type used by [`run`].
pub fn odo_step(input: OdoInput, state: &OdoState, config: &OdoConfig) -> Option<(OdoOutput, OdoState)> {
    let n_avg = state.window_len();
    let code = input.encoder;
    let last = state.samples[0];

    let no_err = !is_code_error(code);
    let no_fault = (last == code || !seq_fault(last, code))
        && !underflow_fault(state.odometric_position_count.0 as u64, state.offset as u64, code);
    let offset = Word32(state.offset as u32);
    let pos = state.odometric_position_count + offset;
    let advance = state.odometric_position_valid && no_fault;

    let mut next = state.clone();
    next.odometer_status = state.odometer_status && no_err;
    next.odometric_position_valid = state.odometric_position_valid && no_fault;
    if advance {
        next.odometric_position_timestamp = state.odometric_position_timestamp + Word32(1);
        next.odometric_position_count = next_phase_word(pos, code) - offset;
    }
    push_window(&mut next.samples, code, n_avg);

    let count = next.odometric_position_count;
    push_window(&mut next.position_count_queue, count, n_avg);
    let pos_ante = next.position_count_queue[n_avg - 1];

    let count_diff = count.signed().0 as i128 - pos_ante.signed().0 as i128;
    let speed = IWord32::from_int(round_half_up(Rational::from_integer(count_diff) * config.effective_speed_scale()));
    push_window(&mut next.speed_history, speed, n_avg);
    let speed_diff = speed.0 as i128 - next.speed_history[n_avg - 1].0 as i128;
    let acceleration = IWord32::from_int(round_half_up(Rational::from_integer(speed_diff) * config.accel_factor()));
    push_window(&mut next.accel_history, acceleration, n_avg);
    let accel_diff = acceleration.0 as i128 - next.accel_history[n_avg - 1].0 as i128;
    let jerk = IWord32::from_int(round_half_up(Rational::from_integer(accel_diff) * config.jerk_factor()));

    if input.marker && next.odometric_position_valid {
        next.last_marker_position = count;
        next.last_marker_timestamp = next.odometric_position_timestamp;
    }

    let relative_mm = (Rational::from_integer(count.0 as i128) * config.delta_s_res_approx_mm).floor();
    let out = OdoOutput {
        odometer_status: next.odometer_status,
        odometric_position_valid: next.odometric_position_valid,
        odometric_position_count: count,
        odometric_position_timestamp: next.odometric_position_timestamp,
        last_marker_position: next.last_marker_position,
        last_marker_timestamp: next.last_marker_timestamp,
        relative_position: Word32::from_int(relative_mm.to_integer()),
        speed,
        acceleration,
        jerk,
        cinematics_timestamp: next.odometric_position_timestamp,
    };
    Some((out, next))
}

/// Threads `odo_step` through `inputs`, collecting every output.
pub fn run<I>(init: OdoState, inputs: I, config: &OdoConfig) -> (Vec<OdoOutput>, OdoState)
where
    I: IntoIterator<Item = OdoInput>,
{
    let mut state = init;
    let mut outputs = Vec::new();
    for input in inputs {
        let (out, next) = odo_step(input, &state, config).expect("odo_step is total");
        outputs.push(out);
        state = next;
    }
    (outputs, state)
}

/// Runs `inputs` and evaluates `pred` on the final state.
pub fn assert_final<I, P>(init: OdoState, inputs: I, config: &OdoConfig, pred: P) -> bool
where
    I: IntoIterator<Item = OdoInput>,
    P: FnOnce(&OdoState) -> bool,
{
    let (_, state) = run(init, inputs, config);
    pred(&state)
}

/// A configuration and its evolving state, stepped in place.
#[derive(Debug, Clone)]
pub struct Odometer {
    config: OdoConfig,
    state: OdoState,
}

impl Odometer {
    pub fn new(config: OdoConfig, init: u64) -> Self {
        let state = mk_init(init, &config);
        Odometer { config, state }
    }

    pub fn step(&mut self, input: OdoInput) -> OdoOutput {
        let (out, next) = odo_step(input, &self.state, &self.config).expect("odo_step is total");
        self.state = next;
        out
    }

    pub fn state(&self) -> &OdoState {
        &self.state
    }

    pub fn config(&self) -> &OdoConfig {
        &self.config
    }
}
