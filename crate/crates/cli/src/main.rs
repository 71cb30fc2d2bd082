mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use polygas::catalog::Level;
use polygas::collision::KernelSpec;
use polygas::dsmc::{format_full, init_ensemble, rng_stream, DsmcParams, InitialCondition, VelocityGrid};
use polygas::euler::{advance_1d, Boundary, Eos, Mesh, PrimitiveState};
use polygas::{bin, reduce, BinningSpec, DiscreteLevels, EnergyMeasure, PhysicalConstants, ThermoModel, Vec3};

use config::{MeasureFile, ModelConfig, Units};

#[derive(Parser)]
#[command(name = "polygas", version, about = "Polyatomic gas thermodynamics, DSMC relaxation and Euler shock tubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate δ, D, c_V and Θ over a temperature range.
    DeltaTable {
        #[arg(long)]
        model: String,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Logarithmic spacing (linear otherwise).
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Reduce a model to its energy measure.
    Reduce {
        #[arg(long)]
        model: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Bin a reduced measure into discrete levels (written as a model config).
    Bin {
        #[arg(long)]
        measure: String,
        /// Comma-separated grounded bin edges starting at 0.
        #[arg(long, value_delimiter = ',', conflicts_with = "t_ref")]
        edges: Option<Vec<f64>>,
        /// Energy unit of --edges.
        #[arg(long, value_enum, default_value_t = EdgeUnits::J)]
        edge_units: EdgeUnits,
        /// Default binning: 64 uniform bins over 40 k_B·T_ref.
        #[arg(long)]
        t_ref: Option<f64>,
        #[arg(long)]
        open_tail: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Space-homogeneous DSMC relaxation.
    Relax {
        #[arg(long)]
        model: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "T0")]
        t0: f64,
        #[arg(long, value_enum, default_value_t = Init::Maxwellian)]
        init: Init,
        #[arg(long)]
        steps: usize,
        /// Time step in units of the reference collision time unless --kernel-c is given.
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mass density, kg/m³.
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Molecules per simulated particle.
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
        /// Kernel constant C of b = C√Δ, m³/s per (m/s). Defaults to one
        /// collision per particle per time unit at T0.
        #[arg(long)]
        kernel_c: Option<f64>,
        #[arg(long, default_value_t = 1)]
        report_every: usize,
        /// Bootstrap replicates for the H standard error (0 disables).
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// 1D Euler shock tube.
    Euler1d {
        #[arg(long)]
        model: String,
        #[arg(long, value_enum, default_value_t = Ic::Sod)]
        ic: Ic,
        #[arg(long, default_value_t = 400)]
        cells: usize,
        /// End time, s.
        #[arg(long, default_value_t = 5e-4)]
        tend: f64,
        /// Tube length, m.
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Transmissive)]
        boundary: BoundaryArg,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EdgeUnits {
    J,
    #[value(name = "cm-1")]
    Wavenumber,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Maxwellian,
    Twobeam,
    Inverted,
    TwobeamInverted,
}

impl From<Init> for InitialCondition {
    fn from(i: Init) -> Self {
        match i {
            Init::Maxwellian => InitialCondition::Maxwellian,
            Init::Twobeam => InitialCondition::TwoBeam,
            Init::Inverted => InitialCondition::Inverted,
            Init::TwobeamInverted => InitialCondition::TwoBeamInverted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Ic {
    Sod,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Transmissive,
}

fn output(path: &Option<String>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {p}"))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: serde::Serialize>(path: &Option<String>, value: &T) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn delta_table(model: &str, tmin: f64, tmax: f64, points: usize, log: bool, out: &Option<String>) -> Result<()> {
    if !(tmin > 0.0 && tmax >= tmin) || points < 1 {
        bail!("need 0 < tmin <= tmax and points >= 1");
    }
    let config = ModelConfig::load(model)?;
    let thermo = ThermoModel::from_model(&config.model()?, PhysicalConstants::si(config.mass_kg()))?;
    let mut w = output(out)?;
    writeln!(w, "T,delta,D,cV,Theta")?;
    for i in 0..points {
        let s = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
        let t = if log { tmin * (tmax / tmin).powf(s) } else { tmin + (tmax - tmin) * s };
        let hc = thermo.heat_capacity(t)?;
        let row = [t, thermo.delta_dof(t)?, hc.d, hc.cv, thermo.theta(t)?].map(format_full);
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Discrete levels for simulation: atoms as they are, densities binned.
fn simulation_levels(measure: &EnergyMeasure, k_b: f64, t_ref: f64) -> Result<DiscreteLevels> {
    if measure.is_atomic() {
        let levels = measure
            .atoms()
            .iter()
            .map(|a| Level { energy: measure.ground_offset() + a.location, degeneracy: a.mass })
            .collect();
        Ok(DiscreteLevels::new(levels)?)
    } else {
        Ok(bin(measure, &BinningSpec::default_for(k_b, t_ref)?)?)
    }
}

#[allow(clippy::too_many_arguments)]
fn relax(
    model: &str,
    n: usize,
    t0: f64,
    init: Init,
    steps: usize,
    dt: f64,
    seed: u64,
    rho: f64,
    weight: f64,
    kernel_c: Option<f64>,
    report_every: usize,
    bootstrap: usize,
    out: &Option<String>,
) -> Result<()> {
    let config = ModelConfig::load(model)?;
    let constants = PhysicalConstants::si(config.mass_kg());
    let measure = reduce(&config.model()?)?;
    let levels = simulation_levels(&measure, constants.k_b, t0)?;
    let c = match kernel_c {
        Some(c) => c,
        None => {
            let number_density = rho / constants.mass;
            let thermal_speed = (constants.k_b * t0 / constants.mass).sqrt();
            1.0 / (number_density * 4.0 * std::f64::consts::PI * thermal_speed)
        }
    };
    let params = DsmcParams { kernel: KernelSpec::maxwell_post(c)?, weight };
    let mut rng = rng_stream(seed, 0);
    let mut ens = init_ensemble(&levels, constants, n, rho, Vec3::zeros(), t0, init.into(), params, &mut rng)?;
    let u = ens.mean_velocity();
    let pec = ens.total_energy() / n as f64 - 0.5 * constants.mass * u.norm_squared();
    let grid = VelocityGrid::thermal(u, ens.thermo().theta_inv(pec)?, &constants)?;
    let report = ens.relax(steps, dt, report_every, &grid, bootstrap, &mut rng)?;
    let mut w = output(out)?;
    report.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn euler1d(
    model: &str,
    cells: usize,
    tend: f64,
    length: f64,
    cfl: f64,
    boundary: BoundaryArg,
    out: &Option<String>,
) -> Result<()> {
    let config = ModelConfig::load(model)?;
    let eos = Eos::new(ThermoModel::from_model(&config.model()?, PhysicalConstants::si(config.mass_kg()))?);
    let boundary = match boundary {
        BoundaryArg::Periodic => Boundary::Periodic,
        BoundaryArg::Transmissive => Boundary::Transmissive,
    };
    // (ρ [kg/m³], p [Pa]) on either side of the diaphragm
    let (left, right) = ((1.0, 1e5), (0.125, 1e4));
    let mut mesh = Mesh::from_fn(&eos, 0.0, length, cells, boundary, |x| {
        let (rho, p) = if x < 0.5 * length { left } else { right };
        PrimitiveState { rho, u: 0.0, t: eos.temperature_from_pressure(rho, p) }
    })?;
    advance_1d(&mut mesh, &eos, cfl, tend)?;
    let mut w = output(out)?;
    mesh.write_csv(&eos, &mut w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DeltaTable { model, tmin, tmax, points, log, out } => delta_table(&model, tmin, tmax, points, log, &out),
        Command::Reduce { model, out } => {
            let config = ModelConfig::load(&model)?;
            let measure = reduce(&config.model()?)?;
            write_json(&out, &MeasureFile { molecular_mass: config.molecular_mass, measure })
        }
        Command::Bin { measure, edges, edge_units, t_ref, open_tail, out } => {
            let file = MeasureFile::load(&measure)?;
            let spec = match (edges, t_ref) {
                (Some(edges), _) => {
                    let scale = match edge_units {
                        EdgeUnits::J => 1.0,
                        EdgeUnits::Wavenumber => polygas::constants::HC,
                    };
                    BinningSpec::new(edges.into_iter().map(|e| e * scale).collect(), open_tail)?
                }
                (None, Some(t)) => BinningSpec::default_for(polygas::constants::K_B, t)?,
                (None, None) => bail!("bin needs --edges or --t-ref"),
            };
            let levels = bin(&file.measure, &spec)?;
            let config = ModelConfig::from_levels(file.molecular_mass, &levels);
            debug_assert_eq!(config.units, Units::Joule);
            write_json(&out, &config)
        }
        Command::Relax {
            model,
            n,
            t0,
            init,
            steps,
            dt,
            seed,
            rho,
            weight,
            kernel_c,
            report_every,
            bootstrap,
            out,
        } => relax(&model, n, t0, init, steps, dt, seed, rho, weight, kernel_c, report_every, bootstrap, &out),
        Command::Euler1d { model, ic: Ic::Sod, cells, tend, length, cfl, boundary, out } => {
            euler1d(&model, cells, tend, length, cfl, boundary, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            // first line only: "error: ..."
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
