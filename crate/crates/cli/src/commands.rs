use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use kerrlab::elliptic::{comp_d, comp_e, comp_k, hyp2f1, incomp_e, incomp_f};
use kerrlab::integrator::{future_null_tangent, integrate, GeodesicState, Trajectory};
use kerrlab::spherical::{initial_state, scan, spherical_orbit};
use kerrlab::{
    classify, radial_poly, radial_roots, selftest, KerrStarPoint, MotionConstants, TangentVector,
};
use serde::Serialize;

use crate::args::{
    ClassifyArgs, ConstantsArgs, EllipticArgs, EllipticFn, Format, IntegrateArgs, SphericalCommand,
};
use crate::config::Settings;
use crate::UsageError;

/// Exit status of a command that ran to completion.
pub type Status = i32;

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn json_only(s: &Settings, what: &str) -> anyhow::Result<()> {
    if s.format == Some(Format::Csv) {
        bail!(UsageError(format!("{what} has no CSV form")));
    }
    Ok(())
}

pub fn potentials(s: &Settings, args: &ConstantsArgs) -> anyhow::Result<Status> {
    json_only(s, "potentials")?;
    let c = MotionConstants::new(&s.params, args.e, args.l, args.carter_q, args.q);
    let report = radial_roots(&radial_poly(&c, &s.params), s.root_tol)?;
    write_json(s.out.as_deref(), &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct TrajectoryRow {
    s: f64,
    #[serde(rename = "t*")]
    t_star: f64,
    r: f64,
    theta: f64,
    phi_star: f64,
    dr_ds: f64,
    dtheta_ds: f64,
    #[serde(rename = "drift_E")]
    drift_e: f64,
    #[serde(rename = "drift_L")]
    drift_l: f64,
    drift_q: f64,
    #[serde(rename = "drift_K")]
    drift_k: f64,
}

fn rows(tr: &Trajectory) -> Vec<TrajectoryRow> {
    tr.samples
        .iter()
        .zip(&tr.sample_drift)
        .map(|(st, d)| TrajectoryRow {
            s: st.affine_param,
            t_star: st.point.t_star,
            r: st.point.r,
            theta: st.point.theta,
            phi_star: st.point.phi_star,
            dr_ds: st.velocity.components[1],
            dtheta_ds: st.velocity.components[2],
            drift_e: d.e,
            drift_l: d.l,
            drift_q: d.q,
            drift_k: d.k,
        })
        .collect()
}

fn initial(s: &Settings, args: &IntegrateArgs) -> anyhow::Result<GeodesicState> {
    if let Some(r) = args.spherical {
        let orbit = spherical_orbit(&s.params, r)
            .map_err(|e| UsageError(format!("--spherical {r}: {e}")))?;
        return Ok(initial_state(&s.params, &orbit)?);
    }
    let [t_star, r, theta, phi_star] = args.init[..] else {
        bail!(UsageError(format!(
            "--init takes 4 components, got {}",
            args.init.len()
        )));
    };
    let point = KerrStarPoint {
        t_star,
        r,
        theta,
        phi_star,
    };
    let velocity = match *args.dir.as_slice() {
        [dt, dr, dth, dph] => TangentVector::star([dt, dr, dth, dph]),
        [dr, dth, dph] => future_null_tangent(&s.params, &point, [dr, dth, dph])?,
        _ => bail!(UsageError("--dir takes 3 or 4 components".into())),
    };
    Ok(GeodesicState {
        point,
        velocity,
        affine_param: 0.0,
    })
}

#[derive(Serialize)]
struct EventLog<'a> {
    termination: kerrlab::integrator::Termination,
    drift: kerrlab::integrator::Drift,
    initial_constants: MotionConstants,
    events: &'a [kerrlab::integrator::Event],
}

pub fn integrate_cmd(s: &Settings, args: &IntegrateArgs) -> anyhow::Result<Status> {
    let st = initial(s, args)?;
    let tol = args.tol.unwrap_or(s.ode_tol);
    if !(tol > 0.0) {
        bail!(UsageError(format!("--tol must be positive, got {tol}")));
    }
    let smax = args.smax.unwrap_or(100.0 * s.params.m());
    let tr = integrate(&s.params, &st, smax, tol)?;
    let log = EventLog {
        termination: tr.termination,
        drift: tr.drift,
        initial_constants: tr.initial_constants,
        events: &tr.events,
    };
    if s.format == Some(Format::Json) {
        #[derive(Serialize)]
        struct Full<'a> {
            samples: Vec<TrajectoryRow>,
            #[serde(flatten)]
            log: EventLog<'a>,
        }
        write_json(
            s.out.as_deref(),
            &Full {
                samples: rows(&tr),
                log,
            },
        )?;
        return Ok(0);
    }
    write_csv(s.out.as_deref(), &rows(&tr))?;
    let events_path: Option<PathBuf> = args.events.clone().or_else(|| {
        s.out.as_ref().map(|p| {
            let mut os = p.clone().into_os_string();
            os.push(".events.json");
            PathBuf::from(os)
        })
    });
    match events_path {
        Some(p) => write_json(Some(&p), &log)?,
        None => eprintln!("{}", serde_json::to_string_pretty(&log)?),
    }
    Ok(0)
}

pub fn spherical(s: &Settings, cmd: &SphericalCommand) -> anyhow::Result<Status> {
    match *cmd {
        SphericalCommand::Scan { n } => {
            if n == 0 {
                bail!(UsageError("--n must be positive".into()));
            }
            let table = scan(&s.params, n, s.quad_tol)?;
            match s.format {
                Some(Format::Json) => write_json(s.out.as_deref(), &table)?,
                _ => write_csv(s.out.as_deref(), &table)?,
            }
        }
        SphericalCommand::At { r } => {
            json_only(s, "spherical at")?;
            write_json(s.out.as_deref(), &spherical_orbit(&s.params, r)?)?;
        }
    }
    Ok(0)
}

pub fn classify_cmd(s: &Settings, args: &ClassifyArgs) -> anyhow::Result<Status> {
    json_only(s, "classify")?;
    let c = MotionConstants::null(&s.params, args.e, args.l, args.carter_q);
    write_json(s.out.as_deref(), &classify(&s.params, &c, args.r)?)?;
    Ok(0)
}

pub fn elliptic(s: &Settings, args: &EllipticArgs) -> anyhow::Result<Status> {
    let x = &args.args;
    let arity = match args.function {
        EllipticFn::K | EllipticFn::E | EllipticFn::D => 1,
        EllipticFn::F | EllipticFn::Einc => 2,
        EllipticFn::Hyp2f1 => 4,
    };
    if x.len() != arity {
        bail!(UsageError(format!(
            "--fn {:?} takes {arity} argument(s), got {}",
            args.function,
            x.len()
        )));
    }
    let value = match args.function {
        EllipticFn::K => comp_k(x[0]),
        EllipticFn::E => comp_e(x[0]),
        EllipticFn::D => comp_d(x[0]),
        EllipticFn::F => incomp_f(x[0], x[1]),
        EllipticFn::Einc => incomp_e(x[0], x[1]),
        EllipticFn::Hyp2f1 => hyp2f1(x[0], x[1], x[2], x[3]),
    }?;
    match s.format {
        Some(Format::Json) => {
            #[derive(Serialize)]
            struct Scalar<'a> {
                args: &'a [f64],
                value: f64,
            }
            write_json(s.out.as_deref(), &Scalar { args: x, value })?;
        }
        Some(Format::Csv) => bail!(UsageError("elliptic has no CSV form".into())),
        None => {
            let mut w = sink(s.out.as_deref())?;
            writeln!(w, "{value}")?;
            w.flush()?;
        }
    }
    Ok(0)
}

pub fn selftest_cmd(s: &Settings) -> anyhow::Result<Status> {
    json_only(s, "selftest")?;
    let report = selftest::run(&s.selftest_config())?;
    write_json(s.out.as_deref(), &report)?;
    if report.passed {
        Ok(0)
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("selftest: check {} failed", c.name);
        }
        Ok(1)
    }
}
