use std::path::Path;

use proptest::prelude::*;

use perchlab::harness::{filter_training_set, read_dataset};
use perchlab::learn::{combine, ephe_update, r_legs, r_theta, PolicyParams, SearchDistribution};
use perchlab::policy::{solve_dual, OcSvmModel, OcSvmSettings, TrainedPolicy};
use perchlab::sensing::sense;
use perchlab::sim::{motor_response, step_dynamics, MotorCommand, QuadParams, QuadState, DT};
use perchlab::sysid::{inertia_from_period, PendulumSetup};

fn sample(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample").join(name)
}

fn state() -> impl Strategy<Value = QuadState> {
    (
        -1.0..1.0f64,
        0.0..2.0f64,
        -1.0..1.0f64,
        (-4.0..4.0f64, -4.0..4.0f64, -10.0..10.0f64),
        (0.0..0.3f64, 0.0..0.3f64),
    )
        .prop_map(|(x, z, pitch, (vx, vz, pitch_rate), (thrust_fore, thrust_aft))| QuadState {
            x,
            z,
            pitch,
            vx,
            vz,
            pitch_rate,
            thrust_fore,
            thrust_aft,
            t: 0.0,
        })
}

proptest! {
    #[test]
    fn motor_output_stays_within_limits(cur in 0.0..0.3f64, cmd in -1.0..1.0f64, dt in 1e-4..0.1f64) {
        let p = QuadParams::default();
        let next = motor_response(cur, cmd, &p, dt);
        prop_assert!((0.0..=p.channel_max_thrust()).contains(&next));
    }

    #[test]
    fn motor_moves_toward_command(cur in 0.0..0.3f64, cmd in 0.0..0.3f64) {
        let p = QuadParams::default();
        let next = motor_response(cur, cmd, &p, DT);
        prop_assert!((next - cmd).abs() <= (cur - cmd).abs() + 1e-15);
    }

    #[test]
    fn dynamics_step_is_deterministic(s in state(), f in 0.0..0.5f64, a in 0.0..0.5f64) {
        let p = QuadParams::default();
        let cmd = MotorCommand { thrust_cmd_fore: f, thrust_cmd_aft: a };
        let x = step_dynamics(&s, &cmd, &p, DT).unwrap();
        let y = step_dynamics(&s, &cmd, &p, DT).unwrap();
        prop_assert_eq!(x, y);
        prop_assert!(x.thrust_fore <= p.channel_max_thrust() && x.thrust_aft <= p.channel_max_thrust());
    }

    #[test]
    fn tau_falls_as_the_ceiling_nears(s in state(), gap in 0.05..1.5f64, closer in 0.1..0.9f64) {
        let mut s = s;
        s.vz = s.vz.abs() + 0.5;
        let far = sense(&s, s.z + gap);
        let near = sense(&s, s.z + gap * closer);
        prop_assert!(near.tau < far.tau);
        prop_assert!(near.d_ceil < far.d_ceil);
    }

    #[test]
    fn sensed_cues_scale_consistently(s in state(), gap in 0.05..1.5f64, k in 0.5..2.0f64) {
        // Scaling distance and velocities together leaves τ and the product ϑx·D unchanged.
        let mut s = s;
        s.vz = s.vz.abs() + 0.5;
        let a = sense(&s, s.z + gap);
        let mut t = s;
        t.vx *= k;
        t.vz *= k;
        let b = sense(&t, t.z + gap * k);
        prop_assert!((a.tau - b.tau).abs() <= 1e-12 * a.tau.max(1.0));
        prop_assert!((a.theta_x * a.d_ceil * k - b.theta_x * b.d_ceil).abs() <= 1e-9);
    }

    #[test]
    fn reward_terms_are_bounded(deg in -360.0..360.0f64, n in 0u8..6, body: bool) {
        let rt = r_theta(deg);
        let rl = r_legs(n, body);
        prop_assert!((0.0..=1.0).contains(&rt));
        prop_assert!((0.0..=1.0).contains(&rl));
        let r = combine(rt, rt, rt, rl);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn ephe_update_ignores_reward_scale(
        elites in prop::collection::vec((0.01..0.5f64, 0.2..9.0f64, 0.01..1.0f64), 3),
        c in 0.01..100.0f64,
    ) {
        let dist = SearchDistribution {
            mu: PolicyParams { tau_cr: 0.25, a_rot: 4.0 },
            sigma: PolicyParams { tau_cr: 0.1, a_rot: 2.0 },
        };
        let floor = PolicyParams { tau_cr: 0.005, a_rot: 0.1 };
        let base: Vec<(PolicyParams, f64)> =
            elites.iter().map(|(t, a, r)| (PolicyParams { tau_cr: *t, a_rot: *a }, *r)).collect();
        let scaled: Vec<(PolicyParams, f64)> = base.iter().map(|(p, r)| (*p, r * c)).collect();
        let u = ephe_update(&dist, &base, floor).dist;
        let v = ephe_update(&dist, &scaled, floor).dist;
        for (x, y) in [(u.mu.tau_cr, v.mu.tau_cr), (u.mu.a_rot, v.mu.a_rot), (u.sigma.tau_cr, v.sigma.tau_cr), (u.sigma.a_rot, v.sigma.a_rot)] {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn inertia_scales_with_period_squared(t in 0.2..3.0f64, k in 0.5..3.0f64) {
        let setup = PendulumSetup { mass: 0.03, string_separation: 0.07, string_length: 0.5 };
        let ratio = inertia_from_period(&setup, t * k) / inertia_from_period(&setup, t);
        prop_assert!((ratio - k * k).abs() <= 1e-12 * k * k);
    }

    #[test]
    fn training_set_shrinks_as_threshold_rises(lo in 0.0..1.0f64, step in 0.0..0.5f64) {
        let rows = read_dataset(&sample("dataset.jsonl")).unwrap();
        let hi = (lo + step).min(1.0);
        let a = filter_training_set(&rows, lo).map(|v| v.len()).unwrap_or(0);
        let b = filter_training_set(&rows, hi).map(|v| v.len()).unwrap_or(0);
        prop_assert!(b <= a);
    }
}

fn svm_points(seed: u64, n: usize) -> Vec<[f64; 3]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn svm_dual_is_feasible_and_order_free(seed in 0u64..1000, nu in 0.05..0.5f64, rot in 1usize..40) {
        let pts = svm_points(seed, 40);
        let settings = OcSvmSettings { gamma: 1.0, nu, ..OcSvmSettings::default() };
        let a = solve_dual(&pts, &settings).unwrap();
        let sum: f64 = a.alphas.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-6);
        prop_assert!(a.alphas.iter().all(|x| *x >= -1e-12 && *x <= a.upper + 1e-12));

        let mut shuffled = pts.clone();
        shuffled.rotate_left(rot);
        let b = solve_dual(&shuffled, &settings).unwrap();
        let model = |p: &Vec<[f64; 3]>, s: &perchlab::policy::DualSolution| OcSvmModel {
            support_vectors: p.clone(),
            alphas: s.alphas.clone(),
            rho: s.rho,
            gamma: settings.gamma,
            nu,
        };
        let (ma, mb) = (model(&pts, &a), model(&shuffled, &b));
        for q in svm_points(seed + 1, 10) {
            prop_assert!((ma.decision(&q) - mb.decision(&q)).abs() <= 1e-3);
        }
    }
}

#[test]
fn trained_policy_round_trips_exactly() {
    let p = TrainedPolicy::load(&sample("policy.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("policy.json");
    p.save(&out).unwrap();
    assert_eq!(TrainedPolicy::load(&out).unwrap(), p);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(sample("policy.json")).unwrap());
}
