use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use tmotive::check::Status;
use tmotive::field::GaloisField;
use tmotive::motives::{self, Descriptor, Trivialization};
use tmotive::report::{self, CheckRow, RunConfig, EXIT_CONFIG, PRECISION_ENV};
use tmotive::special_fn::{SpecialFnConfig, SpecialFns};
use tmotive::{periods, torsion, Error};

#[derive(Parser)]
#[command(name = "tmotive", version, about = "Carlitz periods, Anderson-Thakur functions and prolonged t-motives")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone, Copy)]
struct Trunc {
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Target u-adic precision.
    #[arg(id = "prec", long = "N", env = PRECISION_ENV, default_value_t = 96)]
    n: i64,
    /// Number of t-coefficients kept (derived from N when omitted).
    #[arg(long = "M")]
    m: Option<usize>,
    /// Product cutoff (derived when omitted).
    #[arg(long = "J")]
    j: Option<u32>,
}

impl Trunc {
    fn config(&self, default_m: usize) -> tmotive::Result<SpecialFnConfig> {
        let m = self.m.unwrap_or(default_m);
        match self.j {
            Some(j) => SpecialFnConfig::new(self.q, j, m, self.n),
            None => {
                let cfg = SpecialFnConfig::auto(self.q, m, self.n);
                cfg.validate(self.q)?;
                Ok(cfg)
            }
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Ω, ω, π̃ and their difference equations.
    Specialfn {
        #[command(flatten)]
        trunc: Trunc,
        /// t-coefficients of Ω and ω to print.
        #[arg(long, default_value_t = 3)]
        terms: usize,
        #[arg(long)]
        json: bool,
    },
    /// Period coordinates of the n-th Carlitz tensor power.
    Periods {
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        json: bool,
    },
    /// Root relations of ω and its hyperderivatives at roots of unity.
    Torsion {
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
        #[arg(long)]
        json: bool,
    },
    /// Prolongs a motive, dual motive or t-module descriptor.
    Prolong {
        #[arg(long)]
        descriptor: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Verifies the k-th prolongation of a trivialization.
    Verify {
        #[arg(long)]
        descriptor: PathBuf,
        /// Defaults to the known trivialization of a Carlitz tensor power.
        #[arg(long)]
        trivialization: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long = "N", env = PRECISION_ENV, default_value_t = 96)]
        n: i64,
        #[arg(long)]
        json: bool,
    },
    /// Runs every verifier for a config file.
    Suite {
        #[arg(long)]
        config: PathBuf,
        /// Writes golden fixture files into this directory.
        #[arg(long)]
        emit_fixtures: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn print_rows(rows: &[CheckRow], json: bool, extra: Value) {
    if json {
        let out = json!({ "checks": rows, "values": extra, "status": worst(rows) });
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
        return;
    }
    if let Value::Object(map) = &extra {
        for (k, v) in map {
            println!("{k} = {v}");
        }
    }
    for r in rows {
        match r.residual {
            Some(res) => println!(
                "{:<10} {:<36} valuation {} precision {}",
                r.status.as_str(),
                r.label,
                res.valuation.map_or("inf".into(), |v| v.to_string()),
                res.precision
            ),
            None => println!("{:<10} {}", r.status.as_str(), r.label),
        }
    }
    println!("status: {}", worst(rows).as_str());
}

fn worst(rows: &[CheckRow]) -> Status {
    rows.iter().fold(Status::Pass, |acc, r| acc.and(r.status))
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_CONFIG
}

fn specialfn(trunc: Trunc, terms: usize, json: bool) -> Result<i32, Error> {
    let f = GaloisField::for_q(trunc.q, 1)?;
    let fns = SpecialFns::new(&f, trunc.config(SpecialFnConfig::m_for_theta(trunc.q, trunc.n, 1))?)?;
    let rows = report::difference_equation_checks(&fns);
    let values = if json {
        json!({
            "config": fns.config(),
            "pi_tilde": fns.pi_tilde().to_json(),
            "omega_big": fns.omega_big().truncate_t(terms).to_json(),
            "omega_small": fns.omega_small().truncate_t(terms).to_json(),
        })
    } else {
        json!({
            "pi_tilde": fns.pi_tilde().to_string(),
            "Omega": fns.omega_big().truncate_t(terms).coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "omega": fns.omega_small().truncate_t(terms).coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    };
    print_rows(&rows, json, values);
    Ok(report::exit_code(worst(&rows)))
}

fn periods_cmd(trunc: Trunc, n: u32, json: bool) -> Result<i32, Error> {
    let f = GaloisField::for_q(trunc.q, 1)?;
    let fns = SpecialFns::new(&f, trunc.config(SpecialFnConfig::m_for_theta(trunc.q, trunc.n, n))?)?;
    let rows = report::period_checks(&fns, &[n]);
    let values = match periods::period_coordinates(&fns, n) {
        Ok(pv) if json => pv.to_json(),
        Ok(pv) => {
            let z: serde_json::Map<String, Value> =
                pv.z.iter().enumerate().map(|(i, z)| (format!("z_{}", i + 1), Value::String(z.to_string()))).collect();
            Value::Object(z)
        }
        Err(_) => Value::Null,
    };
    print_rows(&rows, json, values);
    Ok(report::exit_code(worst(&rows)))
}

fn torsion_cmd(trunc: Trunc, d: u32, nmax: usize, json: bool) -> Result<i32, Error> {
    let f = GaloisField::for_q(trunc.q, d)?;
    let m = SpecialFnConfig::m_for_zeta(trunc.q, d, trunc.n, nmax as u32);
    let fns = SpecialFns::new(&f, trunc.config(m)?)?;
    if torsion::roots_of_degree(&f, d).is_empty() {
        return Err(Error::Config(format!("no elements of degree {d}")));
    }
    let rows = report::torsion_checks(&fns, d, nmax);
    print_rows(&rows, json, Value::Null);
    Ok(report::exit_code(worst(&rows)))
}

fn prolong_cmd(path: &PathBuf, k: usize, json: bool) -> Result<i32, Error> {
    let (_, desc) = Descriptor::from_json_str(&std::fs::read_to_string(path)?)?;
    let out = desc.prolong(k);
    if json {
        println!("{}", serde_json::to_string_pretty(&out.to_json())?);
        return Ok(0);
    }
    let print_mat = |name: &str, rows: Vec<Vec<String>>| {
        println!("{name}:");
        for r in rows {
            println!("  [{}]", r.join(", "));
        }
    };
    match &out {
        Descriptor::Motive(m) => print_mat("Theta", string_rows(m.theta.entries(), m.rank())),
        Descriptor::Dual(m) => print_mat("Theta~", string_rows(m.theta_tilde.entries(), m.rank())),
        Descriptor::TModule(t) => {
            for (i, a) in t.a.iter().enumerate() {
                print_mat(&format!("A_{i}"), string_rows(a.entries(), a.n()));
            }
        }
    }
    Ok(0)
}

fn string_rows<T: std::fmt::Display>(entries: &[T], n: usize) -> Vec<Vec<String>> {
    entries.chunks(n).map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

fn verify_cmd(path: &PathBuf, triv: Option<&PathBuf>, k: usize, n: i64, json: bool) -> Result<i32, Error> {
    let (field, desc) = Descriptor::from_json_str(&std::fs::read_to_string(path)?)?;
    let base = match (&desc, triv) {
        (_, Some(p)) => Trivialization::from_json_str(&field, &std::fs::read_to_string(p)?)?,
        (Descriptor::TModule(_), None) => return Err(Error::Config("t-modules carry no trivialization".into())),
        (d, None) => {
            let theta = match d {
                Descriptor::Motive(m) => &m.theta,
                Descriptor::Dual(m) => &m.theta_tilde,
                Descriptor::TModule(_) => unreachable!(),
            };
            let power = motives::carlitz_power(theta).ok_or_else(|| {
                Error::Config("no --trivialization given and the descriptor is not a Carlitz tensor power".into())
            })?;
            let m = 2 * (k + power as usize) + 8;
            let fns = SpecialFns::new(&field, SpecialFnConfig::auto(field.q(), m, n))?;
            match d {
                Descriptor::Motive(_) => motives::carlitz_trivialization(&fns, power),
                _ => motives::carlitz_dual_trivialization(&fns, power),
            }
        }
    };
    let prolonged = desc.prolong(k);
    let t = motives::prolong_trivialization(&base, k);
    let label = format!("k={k}");
    let row = match motives::verify_trivialization(&prolonged, &t, n) {
        Ok(r) => CheckRow::residual("verify", label, r),
        Err(e) if e.is_precision_exhaustion() => CheckRow::error("verify", label, &e),
        Err(e) => return Err(e),
    };
    if json {
        let text = match row.residual {
            Some(r) => serde_json::to_string_pretty(&r)?,
            None => serde_json::to_string_pretty(&json!({ "status": row.status, "pass": false, "detail": row.detail }))?,
        };
        println!("{text}");
    } else {
        print_rows(std::slice::from_ref(&row), false, Value::Null);
    }
    Ok(report::exit_code(row.status))
}

fn suite_cmd(path: &Path, emit: Option<&PathBuf>, json: bool) -> Result<i32, Error> {
    let cfg = RunConfig::load(path)?.with_env_override()?;
    if let Some(dir) = emit {
        for p in report::emit_fixtures(&cfg, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    let rep = report::run_suite(&cfg)?;
    rep.write_outputs()?;
    if json {
        print!("{}", rep.to_json_string());
    } else {
        for r in &rep.checks {
            println!("{:<10} {:<20} {}", r.status.as_str(), r.section, r.label);
        }
        let s = &rep.summary;
        println!("pass {} fail {} exhausted {}: {}", s.pass, s.fail, s.exhausted, s.status.as_str());
    }
    Ok(rep.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Specialfn { trunc, terms, json } => specialfn(*trunc, *terms, *json),
        Cmd::Periods { trunc, n, json } => periods_cmd(*trunc, *n, *json),
        Cmd::Torsion { trunc, d, nmax, json } => torsion_cmd(*trunc, *d, *nmax, *json),
        Cmd::Prolong { descriptor, k, json } => prolong_cmd(descriptor, *k, *json),
        Cmd::Verify { descriptor, trivialization, k, n, json } => {
            verify_cmd(descriptor, trivialization.as_ref(), *k, *n, *json)
        }
        Cmd::Suite { config, emit_fixtures, json } => suite_cmd(config, emit_fixtures.as_ref(), *json),
    };
    ExitCode::from(result.unwrap_or_else(fail) as u8)
}
