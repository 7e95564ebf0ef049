//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use odo_core::encoder::{
    fold_positions, is_code_error, next_phase0, phase, phase0, seq_fault, seq_fault_table, PhaseCode,
};
use odo_core::harness::{
    check_position_accuracy, check_speed_accuracy, default_speed_tolerance, gen_valid_sequence, inject_faults,
    EncoderTrace, FaultKind, FaultSpec, Lcg,
};
use odo_core::kinematics::{check_no_loss, sample_trace, MotionProfile, ProfileShape, Segment};
use odo_core::odometer::{assert_final, mk_init, odo_step, run, OdoState};
use odo_core::{OdoConfig, OdoInput, Word32};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn ac1_encoder_lemmas() -> Check {
    let start = Instant::now();
    for n in 0..6 {
        let c = phase0(n);
        ensure(!(c.c1 && c.c2 && c.c3), || format!("phase0({n}) has all lines high"))?;
        ensure(c.c1 || c.c2 || c.c3, || format!("phase0({n}) has all lines low"))?;
        ensure(phase0(n + 6) == c, || format!("phase0({n} + 6) != phase0({n})"))?;
        ensure(phase0(n + 1) != c, || format!("phase0({n}) == phase0({n} + 1)"))?;
        ensure(phase0(n + 5) != c, || format!("phase0({n}) == phase0({n} + 5)"))?;
        for m in 0..6 {
            ensure(n == m || phase0(m) != c, || format!("phase0 not injective on {n}, {m}"))?;
        }
    }
    for x in 0..1000 {
        ensure(phase(x) != PhaseCode::ALL_HIGH && phase(x) != PhaseCode::ALL_LOW, || {
            format!("phase({x}) is an error code")
        })?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("6 codes, AND=false OR=true, periodic, injective ({:?})", start.elapsed()))
}

fn ac2_reference_asserts() -> Check {
    ensure(phase(1) == PhaseCode::new(false, false, true), || format!("phase 1 = {}", phase(1)))?;
    for (code_row, expected) in [(0, 0), (1, 1), (2, 0)] {
        let got = next_phase0(0, phase0(code_row));
        ensure(got == expected, || format!("next_phase0 0 (phase0 {code_row}) = {got}, expected {expected}"))?;
    }
    let fwd = fold_positions(2, [2, 3, 3, 4, 4, 5, 0].map(phase0));
    ensure(fwd == 6, || format!("forward fold = {fwd}"))?;
    let back = fold_positions(6, [0, 5, 4, 4, 3, 3, 2].map(phase0));
    ensure(back == 2, || format!("backward fold = {back}"))?;
    let c = OdoConfig::transcript_default();
    let inputs = [2, 3, 3, 4, 4, 5].map(|n| OdoInput::encoder(phase0(n)));
    let ok = assert_final(mk_init(2, &c), inputs, &c, |s: &OdoState| s.odometer_status && s.odometric_position_valid);
    ensure(ok, || "mk_init 2 run did not end with status and valid".into())?;
    Ok("phase 1, 3 next_phase0, 2 folds, mk_init 2 run".into())
}

fn ac3_seq_fault_table() -> Check {
    let mut pairs = 0;
    for a in 0..8 {
        for b in 0..8 {
            let (last, cur) = (PhaseCode::from_bits(a), PhaseCode::from_bits(b));
            ensure(seq_fault(last, cur) == seq_fault_table(last, cur), || {
                format!("table disagrees on {last} -> {cur}")
            })?;
            pairs += 1;
        }
    }
    for x in 0..8 {
        let x = PhaseCode::from_bits(x);
        ensure(seq_fault(PhaseCode::ALL_HIGH, x), || format!("TTT -> {x} is not a fault"))?;
    }
    let tff = PhaseCode::new(true, false, false);
    let neighbours: Vec<String> =
        (0..8).map(PhaseCode::from_bits).filter(|&x| !seq_fault(tff, x)).map(|x| x.to_string()).collect();
    ensure(neighbours == ["TFT", "TTF"], || format!("TFF non-fault successors {neighbours:?}"))?;
    Ok(format!("{pairs} pairs agree; TTT always faults; TFF -> TFT, TTF only"))
}

const TRANSCRIPT: &str = "\
shaft: 1 stat: true valid: true count:0 pos:0 speed:0
shaft: 2 stat: true valid: true count:1 pos:5 speed:4
shaft: 3 stat: true valid: true count:2 pos:10 speed:8
shaft: 4 stat: true valid: true count:3 pos:15 speed:11
shaft: 5 stat: true valid: true count:4 pos:20 speed:15
shaft: 6 stat: true valid: true count:5 pos:26 speed:19
shaft: 1 stat: true valid: true count:6 pos:31 speed:23
shaft: 2 stat: true valid: true count:7 pos:36 speed:26
";

fn ac4_transcript() -> Check {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_odo"))
        .args(["replay", "1", "2", "3", "4", "5", "6", "1", "2"])
        .output()
        .map_err(|e| format!("spawn: {e}"))?;
    let elapsed = start.elapsed();
    ensure(out.status.success(), || format!("exit {:?}", out.status.code()))?;
    let text = String::from_utf8_lossy(&out.stdout);
    if text != TRANSCRIPT {
        let diff = text
            .lines()
            .zip(TRANSCRIPT.lines())
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| format!("line {}: got `{a}`, want `{b}`", i + 1))
            .unwrap_or_else(|| "line count differs".into());
        return Err(diff);
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("8 lines byte-identical ({elapsed:?})"))
}

fn profile(shape: ProfileShape) -> MotionProfile {
    MotionProfile::new(shape).expect("valid profile")
}

fn compliant_profiles() -> Vec<(&'static str, MotionProfile)> {
    vec![
        (
            "trapezoid",
            profile(ProfileShape::Trapezoid {
                accel_mps2: 0.5,
                cruise_speed_mps: 0.38,
                cruise_duration_s: 3.0,
                decel_mps2: 0.5,
            }),
        ),
        ("sinusoidal", profile(ProfileShape::Sinusoidal { mean_speed_mps: 0.19, amplitude_mps: 0.19, period_s: 1.5 })),
        ("cubic", profile(ProfileShape::Polynomial { coeffs: vec![0.05, 0.01, 0.001] })),
        (
            "piecewise",
            profile(ProfileShape::Piecewise {
                segments: vec![
                    Segment {
                        duration_s: 2.0,
                        profile: ProfileShape::Trapezoid {
                            accel_mps2: 0.8,
                            cruise_speed_mps: 0.3,
                            cruise_duration_s: 10.0,
                            decel_mps2: 0.0,
                        },
                    },
                    Segment {
                        duration_s: 3.0,
                        profile: ProfileShape::Sinusoidal { mean_speed_mps: 0.33, amplitude_mps: 0.03, period_s: 1.0 },
                    },
                ],
            }),
        ),
    ]
}

fn ac5_no_loss() -> Check {
    let start = Instant::now();
    let c = OdoConfig::physical_default();
    ensure(c.sampling_sound(), || "default config violates the sampling hypothesis".into())?;
    let horizon_s = 5.0;
    let refinements = 4;
    let mut checked = 0;
    for (name, p) in compliant_profiles() {
        for init in [1, 4] {
            let report = check_no_loss(&p, &c, init, horizon_s, refinements);
            ensure(report.coarse_len > 500, || format!("{name}: horizon {} steps", report.coarse_len))?;
            ensure(report.refinements.len() == refinements as usize, || format!("{name}: refinement count"))?;
            if let Some(f) = report.first_failure() {
                return Err(format!("{name} init {init}: 1/{} lost a code at {:?} s", f.divisor, f.lost_at_s()));
            }
            let ds = c.delta_s_res_m();
            let dt = c.sampling_interval_f64();
            let coarse = sample_trace(&p, ds, init, dt, report.coarse_len);
            for r in &report.refinements {
                let fine = sample_trace(&p, ds, init, r.dt_s, (report.coarse_len - 1) * r.divisor as usize + 1);
                let f = r.outcome.as_ref().unwrap();
                ensure(f.witnesses(&fine, &coarse), || format!("{name}: retraction 1/{} is not a witness", r.divisor))?;
                checked += 1;
            }
        }
    }

    let mut fast = c.clone();
    fast.speed_max_mps = 2.0 * c.delta_s_res_m() / c.sampling_interval_f64();
    let runaway = MotionProfile::constant_speed(0.95 * fast.speed_max_mps).unwrap();
    let report = check_no_loss(&runaway, &fast, 1, horizon_s, refinements);
    ensure(!report.hypothesis_holds, || "violating config satisfies the hypothesis".into())?;
    let failure = report.first_failure().ok_or("violating config lost no code")?;
    let loss = failure.outcome.as_ref().unwrap_err();
    let at = failure.lost_at_s().unwrap();

    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{checked} retractions over {} steps; violating config loses {} at {at:.4} s (1/{}) ({:?})",
        (horizon_s / c.sampling_interval_f64()) as usize,
        loss.code,
        failure.divisor,
        start.elapsed()
    ))
}

fn ac6_speed_accuracy() -> Check {
    let c = OdoConfig::physical_default();
    let horizon = 1200;
    let tol = default_speed_tolerance(&c);
    let cases = [
        ("constant 0.3", MotionProfile::constant_speed(0.3).unwrap()),
        ("constant 0.1", MotionProfile::constant_speed(0.1).unwrap()),
        (
            "trapezoid",
            profile(ProfileShape::Trapezoid {
                accel_mps2: 0.5,
                cruise_speed_mps: 0.2,
                cruise_duration_s: 6.0,
                decel_mps2: 0.5,
            }),
        ),
    ];
    let (mut worst_speed, mut worst_pos) = (0.0f64, 0.0f64);
    for (name, p) in &cases {
        for init in 1..=6 {
            let speed = check_speed_accuracy(p, &c, init, horizon, None).map_err(|e| e.to_string())?;
            ensure(speed.steps_checked >= 1000, || format!("{name}: only {} steps", speed.steps_checked))?;
            if let Some((k, err)) = speed.first_violation {
                return Err(format!("{name} init {init}: speed error {err:.5} m/s at step {k} > {tol:.5}"));
            }
            let pos = check_position_accuracy(p, &c, init, horizon).map_err(|e| e.to_string())?;
            if let Some((k, err)) = pos.first_violation {
                return Err(format!(
                    "{name} init {init}: position error {err:.5} m at step {k} > {:.5}",
                    pos.tolerance
                ));
            }
            worst_speed = worst_speed.max(speed.max_error);
            worst_pos = worst_pos.max(pos.max_error);
        }
    }
    Ok(format!(
        "max speed error {worst_speed:.5} <= {tol:.5} m/s, max position error {worst_pos:.5} <= {:.5} m",
        2.0 * c.delta_s_res_m()
    ))
}

fn flags_monotone_and_frozen(outs: &[odo_core::OdoOutput]) -> bool {
    outs.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.odometer_status || !b.odometer_status)
            && (a.odometric_position_valid || !b.odometric_position_valid)
            && (a.odometric_position_valid
                || (a.odometric_position_count == b.odometric_position_count
                    && a.odometric_position_timestamp == b.odometric_position_timestamp))
    })
}

fn ac7_fault_injection() -> Check {
    let c = OdoConfig::transcript_default();
    let seeds = 10_000u64;
    let mut injected = 0usize;
    for seed in 0..seeds {
        let len = 16 + (seed % 48) as usize;
        let clean = gen_valid_sequence(len, seed);
        let (clean_out, _) = clean.replay(&c);
        ensure(clean_out.iter().all(|o| o.odometer_status && o.odometric_position_valid), || {
            format!("seed {seed}: clean trace flagged")
        })?;
        let pos = (Lcg::new(!seed).next_u32() as usize) % len;
        let replay = |kind: FaultKind| -> Vec<odo_core::OdoOutput> {
            let t: EncoderTrace = inject_faults(&clean, &FaultSpec::new(kind, [pos])).unwrap();
            t.replay(&c).0
        };
        for kind in [FaultKind::ErrorCodeTtt, FaultKind::ErrorCodeFff] {
            let out = replay(kind);
            ensure(out[..pos].iter().all(|o| o.odometer_status) && !out[pos].odometer_status, || {
                format!("seed {seed}: {kind}@{pos} did not clear status at {pos}")
            })?;
            ensure(flags_monotone_and_frozen(&out), || format!("seed {seed}: {kind}@{pos} flags not monotone"))?;
            injected += 1;
        }
        let out = replay(FaultKind::SkipTransition);
        ensure(out[..pos].iter().all(|o| o.odometric_position_valid) && !out[pos].odometric_position_valid, || {
            format!("seed {seed}: skip_transition@{pos} did not clear valid")
        })?;
        ensure(flags_monotone_and_frozen(&out), || format!("seed {seed}: skip_transition@{pos} flags not monotone"))?;
        injected += 1;

        // Second fault after the first: behaviour after the first must not change.
        if pos + 1 < len {
            let once = inject_faults(&clean, &FaultSpec::new(FaultKind::SkipTransition, [pos])).unwrap();
            let twice = inject_faults(&once, &FaultSpec::new(FaultKind::ErrorCodeTtt, [len - 1])).unwrap();
            let (a, b) = (once.replay(&c).0, twice.replay(&c).0);
            ensure(a[..len - 1] == b[..len - 1] && !b[len - 1].odometer_status, || {
                format!("seed {seed}: later fault changed earlier behaviour")
            })?;
            ensure(b[len - 1].odometric_position_count == a[len - 2].odometric_position_count, || {
                format!("seed {seed}: count moved while invalid")
            })?;
            injected += 1;
        }
        ensure(!is_code_error(clean.codes[pos]), || format!("seed {seed}: generator emitted an error code"))?;
    }
    Ok(format!("{seeds} seeded traces, {injected} injected faults detected"))
}

fn near_wrap_state(c: &OdoConfig, count: u32, timestamp: u32) -> OdoState {
    let mut s = mk_init(0, c);
    s.odometric_position_count = Word32(count);
    s.odometric_position_timestamp = Word32(timestamp);
    s.samples.iter_mut().for_each(|x| *x = phase0(count as u64));
    let n = c.n_avg as u32;
    for (k, q) in s.position_count_queue.iter_mut().enumerate() {
        *q = Word32(count.wrapping_sub((k as u32).min(n)));
    }
    s
}

fn ac8_word_semantics() -> Check {
    let c = OdoConfig::transcript_default();

    // Count steps forward onto 2^32, one row per step.
    let mut s = near_wrap_state(&c, u32::MAX - 3, 100);
    let mut counts = Vec::new();
    let mut speeds = Vec::new();
    for _ in 0..4 {
        let p = s.odometric_position_count.0 as u64;
        let (out, next) = odo_step(OdoInput::encoder(phase0(p + 1)), &s, &c).unwrap();
        ensure(out.odometric_position_valid, || format!("invalid at count {p}"))?;
        counts.push(out.odometric_position_count.0);
        speeds.push(out.speed.0);
        s = next;
    }
    let want = [u32::MAX - 2, u32::MAX - 1, u32::MAX, 0];
    ensure(counts == want, || format!("counts across wrap {counts:?}"))?;
    ensure(speeds.iter().all(|&v| v == speeds[0] && v > 0), || format!("speed jumped across wrap {speeds:?}"))?;
    ensure(s.odometric_position_timestamp == Word32(104), || "timestamp".into())?;

    // Relative position wraps too.
    let (out, _) = odo_step(OdoInput::encoder(phase0(u32::MAX as u64)), &near_wrap_state(&c, u32::MAX, 0), &c).unwrap();
    let mm = ((u32::MAX as u128 * 26) / 5 % (1u128 << 32)) as u32;
    ensure(out.relative_position.0 == mm, || format!("relative position {} != {mm}", out.relative_position.0))?;

    // Timestamp wraps.
    let (out, _) = odo_step(OdoInput::encoder(phase0(7)), &near_wrap_state(&c, 7, u32::MAX), &c).unwrap();
    ensure(out.odometric_position_timestamp == Word32(0), || "timestamp did not wrap".into())?;

    // Timestamp equals the number of valid steps.
    for seed in 0..200u64 {
        let clean = gen_valid_sequence(100, seed);
        let (outs, last) = clean.replay(&c);
        ensure(last.odometric_position_timestamp.0 == 100, || format!("seed {seed}: timestamp"))?;
        let faulty =
            inject_faults(&clean, &FaultSpec::new(FaultKind::SkipTransition, [(seed % 100) as usize])).unwrap();
        let (fouts, flast) = run(mk_init(faulty.init_index, &c), faulty.inputs(), &c);
        let valid_steps = fouts.iter().filter(|o| o.odometric_position_valid).count() as u32;
        ensure(flast.odometric_position_timestamp.0 == valid_steps, || format!("seed {seed}: faulty timestamp"))?;
        ensure(outs.len() == 100, || "length".into())?;
    }
    Ok("count, position and timestamp wrap mod 2^32; timestamp = valid steps".into())
}

fn all_profiles() -> Vec<(&'static str, MotionProfile, f64)> {
    let mut v: Vec<_> = compliant_profiles().into_iter().map(|(n, p)| (n, p, 5.0)).collect();
    v.push(("constant", MotionProfile::constant_speed(0.25).unwrap(), 5.0));
    v.push(("quadratic", profile(ProfileShape::Polynomial { coeffs: vec![0.0, 0.4] }), 3.0));
    v.push((
        "sinusoidal offset",
        profile(ProfileShape::Sinusoidal { mean_speed_mps: 0.3, amplitude_mps: 0.1, period_s: 0.7 }),
        4.0,
    ));
    v
}

fn ac9_finite_differences() -> Check {
    let h = 1e-5;
    let rel = 1e-6;
    let floor = 1e-9;
    let mut compared = 0;
    for (name, p, horizon) in all_profiles() {
        let breaks = p.breakpoints();
        let points = 1000;
        for i in 0..points {
            let t = (i as f64 + 0.5) * horizon / points as f64;
            if breaks.iter().any(|b| (t - b).abs() <= 2.0 * h) {
                continue;
            }
            for order in 1..=3u8 {
                let analytic = p.eval(t, order);
                let fd = (p.eval(t + h, order - 1) - p.eval(t - h, order - 1)) / (2.0 * h);
                let err = (fd - analytic).abs();
                ensure(err <= rel * analytic.abs().max(floor / rel), || {
                    format!("{name}: order {order} at t={t}: analytic {analytic}, difference {fd}")
                })?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} derivative comparisons within {rel:e} relative"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("AC1 encoder lemmas", ac1_encoder_lemmas),
        ("AC2 reference assertions", ac2_reference_asserts),
        ("AC3 seq_fault table", ac3_seq_fault_table),
        ("AC4 transcript replay", ac4_transcript),
        ("AC5 no code loss by sampling", ac5_no_loss),
        ("AC6 speed and position accuracy", ac6_speed_accuracy),
        ("AC7 fault injection", ac7_fault_injection),
        ("AC8 word semantics", ac8_word_semantics),
        ("AC9 finite-difference cross-check", ac9_finite_differences),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
