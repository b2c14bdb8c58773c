//! Plain-text file formats: demonstrations, trajectories, worlds, fitted
//! models and trial records.

use std::fs;
use std::path::{Path, PathBuf};

use hisearch_core::demo::{DemoSample, Demonstration};
use hisearch_core::dynamics::DynamicsModel;
use hisearch_core::gaussian::Gaussian;
use hisearch_core::trajectory::Trajectory;
use hisearch_core::world::{SimWorld, WorldKind};
use hisearch_core::{DMatrix, DVector};
use ini::Ini;

use crate::error::{io_err, CliError, Result};

pub const DEMO_HEADER_2D: [&str; 5] = ["t", "x", "y", "fx", "fy"];
pub const DEMO_HEADER_3D: [&str; 7] = ["t", "x", "y", "yaw", "fx", "fy", "tz"];

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::data(format!("{what}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(CliError::data(format!("{what}: non-finite value")));
    }
    Ok(v)
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| parse_f64(x, what)).collect()
}

fn join(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    fs::write(path, contents).map_err(io_err(path))
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn csv_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok((header, rows))
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses a demonstration file (`t,x,y[,yaw],fx,fy[,tz]`).
pub fn parse_demo(id: &str, text: &str) -> Result<Demonstration> {
    let (header, rows) = csv_rows(text)?;
    let dim = if header == DEMO_HEADER_2D {
        2
    } else if header == DEMO_HEADER_3D {
        3
    } else {
        return Err(CliError::data(format!("{id}: unexpected header {}", header.join(","))));
    };
    let mut samples = Vec::with_capacity(rows.len());
    for (line, r) in rows.iter().enumerate() {
        let what = format!("{id} row {}", line + 2);
        let vals = r.iter().map(|x| parse_f64(x, &what)).collect::<Result<Vec<_>>>()?;
        samples.push(DemoSample {
            t: vals[0],
            pose: DVector::from_column_slice(&vals[1..1 + dim]),
            wrench: DVector::from_column_slice(&vals[1 + dim..1 + 2 * dim]),
        });
    }
    Ok(Demonstration::new(id, samples)?)
}

pub fn format_demo(d: &Demonstration) -> Result<String> {
    let header: &[&str] = if d.dim() == 2 { &DEMO_HEADER_2D } else { &DEMO_HEADER_3D };
    let rows = d.samples().iter().map(|s| {
        std::iter::once(s.t).chain(s.pose.iter().copied()).chain(s.wrench.iter().copied()).map(|x| x.to_string()).collect()
    });
    csv_string(header, rows)
}

pub fn read_demo(path: &Path) -> Result<Demonstration> {
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("demo");
    parse_demo(id, &read_file(path)?)
}

/// A demo set: a directory of demonstration files plus a `manifest`
/// key-value file naming `dim` and `world`.
#[derive(Debug, Clone)]
pub struct DemoSet {
    pub dim: usize,
    pub world: String,
    pub demos: Vec<Demonstration>,
}

pub fn write_demo_set(dir: &Path, world: &str, demos: &[Demonstration]) -> Result<()> {
    let dim = demos.first().map(|d| d.dim()).ok_or_else(|| CliError::data("empty demo set"))?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("manifest"), &format!("dim = {dim}\nworld = {world}\n"))?;
    for d in demos {
        write_file(&dir.join(format!("{}.csv", d.id())), &format_demo(d)?)?;
    }
    Ok(())
}

pub fn read_demo_set(dir: &Path) -> Result<DemoSet> {
    let kv = parse_kv(&read_file(&dir.join("manifest"))?)?;
    let dim: usize = kv_get(&kv, "dim")?.parse().map_err(|_| CliError::data("manifest: bad dim"))?;
    let world = kv_get(&kv, "world")?.to_owned();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let demos = files.iter().map(|p| read_demo(p)).collect::<Result<Vec<_>>>()?;
    if let Some(d) = demos.iter().find(|d| d.dim() != dim) {
        return Err(CliError::data(format!("{}: dimension {} does not match manifest dim {dim}", d.id(), d.dim())));
    }
    Ok(DemoSet { dim, world, demos })
}

/// Parses a trajectory file (`x,y[,yaw][,ffx,ffy[,fftz]]`).
pub fn parse_trajectory(text: &str) -> Result<Trajectory> {
    let (header, rows) = csv_rows(text)?;
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let (dim, ff) = match h.as_slice() {
        ["x", "y"] => (2, false),
        ["x", "y", "yaw"] => (3, false),
        ["x", "y", "ffx", "ffy"] => (2, true),
        ["x", "y", "yaw", "ffx", "ffy", "fftz"] => (3, true),
        _ => return Err(CliError::data(format!("unexpected trajectory header {}", h.join(",")))),
    };
    let mut pts = Vec::with_capacity(rows.len());
    let mut wr = Vec::new();
    for (line, r) in rows.iter().enumerate() {
        let what = format!("trajectory row {}", line + 2);
        let vals = r.iter().map(|x| parse_f64(x, &what)).collect::<Result<Vec<_>>>()?;
        pts.push(DVector::from_column_slice(&vals[..dim]));
        if ff {
            wr.push(DVector::from_column_slice(&vals[dim..2 * dim]));
        }
    }
    let t = Trajectory::new(pts)?;
    Ok(if ff { t.with_ff(wr)? } else { t })
}

pub fn format_trajectory(t: &Trajectory) -> Result<String> {
    let header: &[&str] = match (t.dim(), t.ff_wrench().is_some()) {
        (2, false) => &["x", "y"],
        (3, false) => &["x", "y", "yaw"],
        (2, true) => &["x", "y", "ffx", "ffy"],
        _ => &["x", "y", "yaw", "ffx", "ffy", "fftz"],
    };
    let rows = t.waypoints().iter().enumerate().map(|(i, p)| {
        let mut r: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        if let Some(ff) = t.ff_wrench() {
            r.extend(ff[i].iter().map(|x| x.to_string()));
        }
        r
    });
    csv_string(header, rows)
}

/// Key-value text: `key = value` per line, `#` comments, no sections.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let ini = Ini::load_from_str(text).map_err(|e| CliError::data(e.to_string()))?;
    Ok(ini.general_section().iter().map(|(k, v)| (k.to_owned(), v.to_owned())).collect())
}

fn kv_get<'a>(kv: &'a [(String, String)], key: &str) -> Result<&'a str> {
    kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()).ok_or_else(|| CliError::data(format!("missing key {key}")))
}

/// Applies `key = value` overrides to a world. Unknown keys are errors.
pub fn apply_world_keys<'a>(w: &mut SimWorld, kv: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
    for (k, v) in kv {
        let num = |v: &str| parse_f64(v, k);
        match k {
            "id" => w.id = v.to_owned(),
            "kind" => w.kind = WorldKind::parse(v).ok_or_else(|| CliError::data(format!("unknown world kind {v}")))?,
            "hole_center" => {
                let c = parse_list(v, k)?;
                if c.len() != 2 {
                    return Err(CliError::data("hole_center needs two values"));
                }
                w.hole_center = [c[0], c[1]];
            }
            "hole_yaw" => w.hole_yaw = num(v)?,
            "peg_radius" => w.peg_radius = num(v)?,
            "hole_radius" => w.hole_radius = num(v)?,
            "pin_spacing" => w.pin_spacing = num(v)?,
            "pin_radius" => w.pin_radius = num(v)?,
            "pin_hole_radius" => w.pin_hole_radius = num(v)?,
            "mu_friction" => w.mu_friction = num(v)?,
            "normal_force" => w.normal_force = num(v)?,
            "capture_depth_rate" => w.capture_depth_rate = num(v)?,
            "chamfer_width" => w.chamfer_width = num(v)?,
            "chamfer_slope" => w.chamfer_slope = num(v)?,
            "viscous_damping" => w.viscous_damping = num(v)?,
            "friction_radius" => w.friction_radius = num(v)?,
            other => return Err(CliError::data(format!("unknown world key {other}"))),
        }
    }
    Ok(())
}

/// Reads a world file. A `kind` key selects the defaults the remaining
/// keys override.
pub fn parse_world(text: &str) -> Result<SimWorld> {
    let kv = parse_kv(text)?;
    let kind = kv.iter().find(|(k, _)| k == "kind").map(|(_, v)| v.as_str()).unwrap_or("peg2d");
    let mut w = match WorldKind::parse(kind) {
        Some(WorldKind::Peg2d) => SimWorld::peg2d(),
        Some(WorldKind::Plug3d) => SimWorld::plug3d(),
        None => return Err(CliError::data(format!("unknown world kind {kind}"))),
    };
    apply_world_keys(&mut w, kv.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    w.validate()?;
    Ok(w)
}

pub fn format_world(w: &SimWorld) -> String {
    format!(
        "id = {}\nkind = {}\nhole_center = {}\nhole_yaw = {}\npeg_radius = {}\nhole_radius = {}\npin_spacing = {}\n\
         pin_radius = {}\npin_hole_radius = {}\nmu_friction = {}\nnormal_force = {}\ncapture_depth_rate = {}\n\
         chamfer_width = {}\nchamfer_slope = {}\nviscous_damping = {}\nfriction_radius = {}\n",
        w.id,
        w.kind.name(),
        join(w.hole_center),
        w.hole_yaw,
        w.peg_radius,
        w.hole_radius,
        w.pin_spacing,
        w.pin_radius,
        w.pin_hole_radius,
        w.mu_friction,
        w.normal_force,
        w.capture_depth_rate,
        w.chamfer_width,
        w.chamfer_slope,
        w.viscous_damping,
        w.friction_radius,
    )
}

/// Resolves a world reference: a built-in id (`peg2d`, `plug3d`) or a path
/// to a world file.
pub fn load_world(reference: &str) -> Result<SimWorld> {
    match reference {
        "peg2d" => Ok(SimWorld::peg2d()),
        "plug3d" => Ok(SimWorld::plug3d()),
        path => parse_world(&read_file(Path::new(path))?),
    }
}

fn format_gaussian_body(g: &Gaussian) -> String {
    format!("mean = {}\ncov = {}\n", join(g.mean().iter().copied()), join(g.cov().transpose().iter().copied()))
}

fn gaussian_from_kv(kv: &[(String, String)], dim: usize) -> Result<Gaussian> {
    let mean = parse_list(kv_get(kv, "mean")?, "mean")?;
    let cov = parse_list(kv_get(kv, "cov")?, "cov")?;
    if mean.len() != dim || cov.len() != dim * dim {
        return Err(CliError::data("model: mean/cov sizes do not match dim"));
    }
    Ok(Gaussian::new(DVector::from_vec(mean), DMatrix::from_row_slice(dim, dim, &cov))?)
}

/// Exploration distribution file (`kind = gaussian`, dim, mean, row-major cov).
pub fn format_gaussian(g: &Gaussian) -> String {
    format!("kind = gaussian\ndim = {}\n{}", g.dim(), format_gaussian_body(g))
}

pub fn parse_gaussian(text: &str) -> Result<Gaussian> {
    let kv = parse_kv(text)?;
    if kv_get(&kv, "kind")? != "gaussian" {
        return Err(CliError::data("not a gaussian model file"));
    }
    let dim = kv_get(&kv, "dim")?.parse().map_err(|_| CliError::data("model: bad dim"))?;
    gaussian_from_kv(&kv, dim)
}

/// Dynamics model file: the joint over `[action ; delta]`, `dim` being the
/// pose dimension.
pub fn format_dynamics(m: &DynamicsModel) -> String {
    format!("kind = dynamics\ndim = {}\n{}", m.dim(), format_gaussian_body(m.joint()))
}

pub fn parse_dynamics(text: &str) -> Result<DynamicsModel> {
    let kv = parse_kv(text)?;
    if kv_get(&kv, "kind")? != "dynamics" {
        return Err(CliError::data("not a dynamics model file"));
    }
    let dim: usize = kv_get(&kv, "dim")?.parse().map_err(|_| CliError::data("model: bad dim"))?;
    Ok(DynamicsModel::from_joint(gaussian_from_kv(&kv, 2 * dim)?)?)
}

/// One executed trial as stored in `trials.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: String,
    pub success: bool,
    pub time_to_success: Option<f64>,
    pub max_contact_force: f64,
    pub seed: u64,
}

pub const TRIAL_HEADER: [&str; 5] = ["trial_id", "success", "time_to_success", "max_contact_force", "seed"];

pub fn format_trials(records: &[TrialRecord]) -> Result<String> {
    csv_string(
        &TRIAL_HEADER,
        records.iter().map(|r| {
            vec![
                r.trial_id.clone(),
                (r.success as u8).to_string(),
                r.time_to_success.map(|t| t.to_string()).unwrap_or_default(),
                r.max_contact_force.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn parse_trials(text: &str) -> Result<Vec<TrialRecord>> {
    let (header, rows) = csv_rows(text)?;
    if header != TRIAL_HEADER {
        return Err(CliError::data("unexpected trial record header"));
    }
    rows.into_iter()
        .map(|r| {
            if r.len() != 5 {
                return Err(CliError::data("trial record needs 5 fields"));
            }
            let success = match r[1].as_str() {
                "1" | "true" => true,
                "0" | "false" => false,
                s => return Err(CliError::data(format!("bad success flag {s}"))),
            };
            let time_to_success = if r[2].is_empty() { None } else { Some(parse_f64(&r[2], "time_to_success")?) };
            if time_to_success.is_some() != success {
                return Err(CliError::data(format!("{}: time_to_success must be present iff success", r[0])));
            }
            Ok(TrialRecord {
                trial_id: r[0].clone(),
                success,
                time_to_success,
                max_contact_force: parse_f64(&r[3], "max_contact_force")?,
                seed: r[4].parse().map_err(|_| CliError::data("bad seed"))?,
            })
        })
        .collect()
}

/// Generic comma-separated table writer used for result and plot files.
pub fn format_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    csv_string(header, rows)
}

pub fn parse_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    csv_rows(text)
}
