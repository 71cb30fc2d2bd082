mod common;

use std::f64::consts::PI;

use polygas::catalog::{
    bound_states, build_hf_model, HfOptions, HfVariant, Level, SpectroscopicConstants, DEFAULT_BOUND_N_CAP,
    DEFAULT_J_CAP,
};
use polygas::collision::{kernel_value, scatter, CollisionChannel, KernelSpec};
use polygas::constants::{wavenumber_to_joule, HF_MASS, K_B};
use polygas::dsmc::{init_ensemble, rng_stream, DsmcParams, InitialCondition};
use polygas::euler::{advance_1d, Boundary, Eos, Mesh, PrimitiveState};
use polygas::{
    bin, reduce, BinningSpec, DiscreteLevels, EnergyMeasure, InternalModel, PhysicalConstants, ThermoModel, Vec3,
};
use proptest::prelude::*;
use statrs::function::gamma::gamma;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn hf(variant: HfVariant) -> InternalModel {
    let c = SpectroscopicConstants::HF;
    build_hf_model(variant, &c, c.moment_of_inertia(), &HfOptions::default()).unwrap()
}

fn level_sum(levels: impl IntoIterator<Item = (f64, f64)>, beta: f64) -> f64 {
    let levels: Vec<(f64, f64)> = levels.into_iter().collect();
    let e0 = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
    levels.iter().map(|(e, g)| g * (-beta * (e - e0)).exp()).sum()
}

#[test]
fn reduced_partition_functions_match_direct_sums() {
    let c = SpectroscopicConstants::HF;
    let inertia = c.moment_of_inertia();
    let hcnu = wavenumber_to_joule(c.nu_e);
    let b = wavenumber_to_joule(c.b_over_hc);
    for scale in [0.5, 1.0, 2.0] {
        let beta = scale / (K_B * 300.0);
        let rotor = 2.0 * PI / (inertia * beta);
        let harmonic = 1.0 / (1.0 - (-beta * hcnu).exp());
        let morse = level_sum((0..=c.n_max()).map(|n| (c.morse_energy(n), 1.0)), beta);
        let quantum_rotor = level_sum((0..=200u32).map(|j| (b * (j * (j + 1)) as f64, 2.0 * j as f64 + 1.0)), beta);
        let bound = bound_states(&c, DEFAULT_J_CAP, DEFAULT_BOUND_N_CAP).unwrap();
        let coupled = level_sum(bound.iter().map(|&(j, n)| (c.rovib_energy(j, n), 2.0 * j as f64 + 1.0)), beta);
        let cases = [
            (hf(HfVariant::HarmonicSemiClassical), rotor * harmonic),
            (hf(HfVariant::AnharmonicSemiClassical), rotor * morse),
            (hf(HfVariant::SimplifiedQuantum), quantum_rotor * harmonic),
            (hf(HfVariant::ImprovedQuantum), coupled),
            (InternalModel::monoatomic(1e-20), 1.0),
            (InternalModel::continuous_power(3.0, 1.5, 0.0).unwrap(), 3.0 * gamma(2.5) / beta.powf(2.5)),
            (
                InternalModel::quadratic(vec![1e-46, 2e-46], 0.0).unwrap(),
                2.0 * PI / (beta * (1e-46f64 * 2e-46).sqrt()),
            ),
            (InternalModel::quadratic(vec![1e-46], 0.0).unwrap(), (2.0 * PI / (beta * 1e-46)).sqrt()),
        ];
        for (k, (model, z)) in cases.iter().enumerate() {
            let got = reduce(model).unwrap().laplace_moment(0, beta).unwrap();
            assert!(rel(got, *z) < 1e-10, "case {k} at β scale {scale}: {got} vs {z}");
        }
    }
}

#[test]
fn asymmetric_top_is_not_reduced() {
    assert!(reduce(&InternalModel::quadratic(vec![1e-46, 2e-46, 3e-46], 0.0).unwrap()).is_err());
}

#[test]
fn bounded_vibration_delta_decreases_at_high_temperature() {
    let c = SpectroscopicConstants::HF;
    let levels = (0..=c.n_max()).map(|n| Level { energy: c.morse_energy(n), degeneracy: 1.0 }).collect();
    let vib = InternalModel::discrete(DiscreteLevels::new(levels).unwrap());
    let th = ThermoModel::from_model(&vib, PhysicalConstants::si(HF_MASS)).unwrap();
    let deltas: Vec<f64> = (0..=60).map(|i| th.delta_dof(1e5 * 100f64.powf(i as f64 / 60.0)).unwrap()).collect();
    assert!(deltas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn finer_bins_converge_to_continuous_delta() {
    let m = reduce(&InternalModel::continuous_power(1.0, 0.5, 0.0).unwrap()).unwrap();
    let kt = K_B * 500.0;
    let exact = 2.0 * m.gibbs_moments(1.0 / kt).unwrap().mean / kt;
    let mut previous = f64::INFINITY;
    for n in [16, 64, 256, 1024] {
        let levels = bin(&m, &BinningSpec::uniform(40.0 * kt, n).unwrap()).unwrap();
        let (mut z, mut e) = (0.0, 0.0);
        for l in levels.levels() {
            let w = l.degeneracy * (-l.energy / kt).exp();
            z += w;
            e += w * l.energy;
        }
        let err = rel(2.0 * e / (z * kt), exact);
        assert!(err < previous, "{n} bins: error {err} did not shrink");
        previous = err;
    }
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn kernel_symmetric_under_pair_swaps(
        v in vec3(), w in vec3(), e in prop::array::uniform4(0.0..2.0f64), c in 0.1..3.0f64,
    ) {
        let k = KernelSpec::maxwell_post(c).unwrap();
        let omega = Vec3::z();
        let ch = CollisionChannel::new(e[0], e[1], e[2], e[3]);
        let base = kernel_value(&k, &v, &w, &ch, &omega, 1.0);
        let pre_swapped = kernel_value(&k, &w, &v, &CollisionChannel::new(e[1], e[0], e[2], e[3]), &omega, 1.0);
        let post_swapped = kernel_value(&k, &v, &w, &CollisionChannel::new(e[0], e[1], e[3], e[2]), &omega, 1.0);
        prop_assert!((base - pre_swapped).abs() <= 1e-12 * base.max(1.0));
        prop_assert!((base - post_swapped).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn ground_is_idempotent(seed in any::<u64>()) {
        let mut rng = rng_stream(seed, 0);
        let m = common::random_measure(&mut rng, (-0.9, 2.0));
        let again = EnergyMeasure::ground(m.ground_offset(), m.atoms().to_vec(), m.terms().to_vec()).unwrap();
        prop_assert_eq!(m, again);
    }

    #[test]
    fn scatter_keeps_center_of_mass(v in vec3(), w in vec3(), e in prop::array::uniform4(0.0..1.0f64)) {
        let ch = CollisionChannel::new(e[0], e[1], e[2], e[3]);
        if let Ok((a, b)) = scatter(&v, &w, &ch, &Vec3::x(), 2.0) {
            prop_assert!(((a + b) - (v + w)).norm() < 1e-12 * (v.norm() + w.norm()).max(1.0));
        }
    }
}

#[test]
fn equilibrium_transitions_balance() {
    let t = 800.0;
    let e = K_B * t;
    let levels = DiscreteLevels::from_pairs(&[(0.0, 1.0), (0.7 * e, 2.0), (1.5 * e, 1.0)]).unwrap();
    let c = PhysicalConstants::si(HF_MASS);
    let rho = 1.0;
    let n_dens = rho / HF_MASS;
    let kernel = KernelSpec::maxwell_post(1.0 / (n_dens * 4.0 * PI * (e / HF_MASS).sqrt())).unwrap();
    let mut rng = rng_stream(77, 0);
    let mut ens = init_ensemble(
        &levels,
        c,
        20_000,
        rho,
        Vec3::zeros(),
        t,
        InitialCondition::Maxwellian,
        DsmcParams { kernel, weight: 1.0 },
        &mut rng,
    )
    .unwrap();
    for _ in 0..20 {
        ens.step(0.1, &mut rng).unwrap();
    }
    ens.reset_transitions();
    for _ in 0..200 {
        ens.step(0.1, &mut rng).unwrap();
    }
    let counts = ens.transitions();
    let mut checked = 0;
    for (&(pre, post), &forward) in counts.iter().filter(|((a, b), _)| a < b) {
        let reverse = counts.get(&(post, pre)).copied().unwrap_or(0);
        let sigma = ((forward + reverse) as f64).sqrt();
        assert!(
            (forward as f64 - reverse as f64).abs() < 4.0 * sigma,
            "{pre:?} → {post:?}: {forward} forward, {reverse} reverse"
        );
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} channel pairs sampled");
}

fn scaled_eos(model: InternalModel) -> Eos {
    Eos::new(ThermoModel::from_model(&model, PhysicalConstants::scaled(1.0)).unwrap())
}

#[test]
fn isentropic_sound_speed_matches_closed_form() {
    // dp/dρ along an adiabat, de = (p/ρ²) dρ, integrated with small steps
    let eos = scaled_eos(InternalModel::continuous_power(1.0, 1.0, 0.0).unwrap());
    let (rho, t) = (1.2, 0.8);
    let p_at = |h: f64| {
        let steps = 2000;
        let dr = h / steps as f64;
        let state = PrimitiveState { rho, u: 0.0, t };
        let mut e = eos.to_conserved(&state).unwrap().energy / rho;
        let mut r = rho;
        for _ in 0..steps {
            // midpoint rule in ρ, with T from the current energy
            let temp = |r: f64, e: f64| {
                eos.to_primitive(&polygas::euler::ConservedState { mass: r, momentum: 0.0, energy: e * r }).unwrap().t
            };
            let p0 = r * temp(r, e);
            let e_half = e + 0.5 * dr * p0 / (r * r);
            let rh = r + 0.5 * dr;
            let ph = rh * temp(rh, e_half);
            e += dr * ph / (rh * rh);
            r += dr;
        }
        let s = eos.to_primitive(&polygas::euler::ConservedState { mass: r, momentum: 0.0, energy: e * r }).unwrap();
        eos.pressure(&s)
    };
    let h = 1e-3;
    let fd = (p_at(h) - p_at(-h)) / (2.0 * h);
    let c = eos.sound_speed(t).unwrap();
    assert!(rel(fd, c * c) < 1e-6, "finite difference {fd} vs {}", c * c);
    assert!(rel(c * c, 9.0 / 7.0 * t) < 1e-12);
}

#[test]
fn mirrored_shock_tube_is_mirrored() {
    let eos = scaled_eos(InternalModel::continuous_power(1.0, 0.0, 0.0).unwrap());
    let sod = |x: f64| if x < 0.5 { (1.0, 0.0, 1.0) } else { (0.125, 0.0, 0.1) };
    let init = |mirror: bool| {
        move |x: f64| {
            let (rho, u, p) = sod(if mirror { 1.0 - x } else { x });
            PrimitiveState { rho, u: if mirror { -u } else { u }, t: p / rho }
        }
    };
    let mut a = Mesh::from_fn(&eos, 0.0, 1.0, 200, Boundary::Transmissive, init(false)).unwrap();
    let mut b = Mesh::from_fn(&eos, 0.0, 1.0, 200, Boundary::Transmissive, init(true)).unwrap();
    advance_1d(&mut a, &eos, 0.9, 0.15).unwrap();
    advance_1d(&mut b, &eos, 0.9, 0.15).unwrap();
    let (pa, pb) = (a.primitives(&eos).unwrap(), b.primitives(&eos).unwrap());
    for (sa, sb) in pa.iter().zip(pb.iter().rev()) {
        assert!(rel(sa.rho, sb.rho) < 1e-10 && (sa.u + sb.u).abs() < 1e-10 && rel(sa.t, sb.t) < 1e-10);
    }
}

#[test]
fn shock_tube_density_stays_within_initial_bounds() {
    for model in [InternalModel::monoatomic(0.0), InternalModel::continuous_power(1.0, 0.0, 0.0).unwrap()] {
        let eos = scaled_eos(model);
        let mut mesh = Mesh::from_fn(&eos, 0.0, 1.0, 400, Boundary::Transmissive, |x| {
            if x < 0.5 {
                PrimitiveState { rho: 1.0, u: 0.0, t: 1.0 }
            } else {
                PrimitiveState { rho: 0.125, u: 0.0, t: 0.8 }
            }
        })
        .unwrap();
        advance_1d(&mut mesh, &eos, 0.9, 0.2).unwrap();
        for s in mesh.primitives(&eos).unwrap() {
            assert!((0.125 - 1e-12..=1.0 + 1e-12).contains(&s.rho), "density {} escaped the initial range", s.rho);
        }
    }
}

#[test]
fn uniform_flow_stays_uniform_at_any_drift() {
    let eos = scaled_eos(InternalModel::continuous_power(1.0, 0.5, 0.0).unwrap());
    for u in [-3.0, 0.0, 0.7, 12.0] {
        let s = PrimitiveState { rho: 0.9, u, t: 1.1 };
        let mut mesh = Mesh::from_fn(&eos, 0.0, 1.0, 64, Boundary::Periodic, |_| s).unwrap();
        advance_1d(&mut mesh, &eos, 0.5, 0.2).unwrap();
        for p in mesh.primitives(&eos).unwrap() {
            assert!(rel(p.rho, s.rho) < 1e-12 && (p.u - u).abs() < 1e-12 && rel(p.t, s.t) < 1e-12);
        }
    }
}
