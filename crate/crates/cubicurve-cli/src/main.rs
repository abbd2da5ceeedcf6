//! Command-line surface for the cubicurve library.

use clap::{Args, Parser, Subcommand};
use cubicurve::dynamics::{enumerate_regions, EnumerateOptions};
use cubicurve::finder::{find_v, FinderConfig, FinderOutcome};
use cubicurve::geometry::{self, CurvePoint, TLeading};
use cubicurve::grid::{self, MarkedGrid, RegionDescriptor};
use cubicurve::quadratic;
use cubicurve::realcurve::{enumerate_components, Orientation};
use cubicurve::solver::KneadingSequence;
use cubicurve::Complex64;
use serde_json::{json, Value};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cubicurve",
    about = "Escape regions of the parameter curves of cubic maps with a periodic marked critical point",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write machine-readable output here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<std::path::PathBuf>,
    /// Human-readable tables instead of JSON where available.
    #[arg(long, global = true)]
    pretty: bool,
    /// Seed for randomized starting points (only used where noted).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Puiseux series of escape regions with a given kneading
    /// sequence, optionally filtered by the signs of the order-one
    /// monomials.
    SolveSeries {
        #[arg(long)]
        kneading: String,
        /// One +/- per order-one leading coefficient, e.g. "+-" for 1000.
        #[arg(long)]
        signs: Option<String>,
        #[arg(long, default_value_t = 12)]
        trunc: i64,
        #[command(flatten)]
        radii: Radii,
    },
    /// Enumerate all escape regions of S_p numerically and solve their
    /// series.
    EnumerateRegions {
        #[arg(short)]
        p: usize,
        #[arg(long, default_value_t = 12)]
        trunc: i64,
        #[command(flatten)]
        radii: Radii,
    },
    /// Validate a marked grid against the four grid rules and print its
    /// invariants.
    GridCheck {
        /// Column depths, comma separated, with `inf` for infinite columns:
        /// e.g. "inf,0,1,1".
        #[arg(long)]
        depths: String,
    },
    /// Centers of period-r hyperbolic components of the Mandelbrot set and
    /// their psi values.
    Centers {
        #[arg(short)]
        r: usize,
    },
    /// Degree, Euler characteristics and genus bookkeeping of S_p.
    Euler {
        #[arg(short)]
        p: usize,
        /// Skip the region enumeration (prints only the formula route).
        #[arg(long)]
        formula_only: bool,
        #[command(flatten)]
        radii: Radii,
    },
    /// Render an escape-time picture of the t-plane around a base point.
    Render {
        #[arg(short)]
        p: usize,
        /// JSON file {"a":[re,im],"v":[re,im]} with the base point.
        #[arg(long)]
        base_file: Option<std::path::PathBuf>,
        /// Alternatively: pick the sample point of the census region with
        /// this label and continue it to --base-radius.
        #[arg(long)]
        label: Option<String>,
        #[arg(long, default_value_t = 3.0)]
        base_radius: f64,
        #[arg(long, default_value = "0,0", value_parser = parse_complex, allow_hyphen_values = true)]
        center: Complex64,
        #[arg(long, default_value_t = 0.002)]
        scale: f64,
        /// WIDTHxHEIGHT
        #[arg(long, default_value = "400x400")]
        size: String,
        #[arg(long, default_value_t = 512)]
        steps_per_unit: usize,
        #[command(flatten)]
        radii: Radii,
    },
    /// Residue of dt at the ideal points of S_p.
    Residue {
        #[arg(short)]
        p: usize,
        /// Restrict to one region label.
        #[arg(long)]
        label: Option<String>,
        #[arg(long, default_value_t = 40.0)]
        radius: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        radii: Radii,
    },
    /// Locate v for a given a and kneading sequence by the fixed-point
    /// sweeps.
    FindV {
        #[arg(short)]
        p: usize,
        #[arg(short, value_parser = parse_complex, allow_hyphen_values = true)]
        a: Complex64,
        #[arg(long)]
        kneading: String,
        /// Initial guess; omitted means a seeded random start.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        v0: Option<Complex64>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_sweeps: usize,
    },
    /// Components of the real and pure-imaginary loci of S_p.
    RealComponents {
        #[arg(short)]
        p: usize,
        /// "+", "-" or "both".
        #[arg(long, default_value = "both")]
        orientation: String,
        /// Count 180-degree-rotation pairs once.
        #[arg(long)]
        mod_involution: bool,
    },
    /// Reproduce the survey tables (primitive series, nontrivial-kneading
    /// invariants, quadratic centers, Euler numbers).
    ReproduceTables {
        /// one of: primitive, nontrivial, quadratic, euler
        #[arg(long, default_value = "nontrivial")]
        which: String,
        #[arg(long, default_value_t = 12)]
        trunc: i64,
        #[command(flatten)]
        radii: Radii,
    },
}

#[derive(Args)]
struct Radii {
    /// Inner fiber radius for the census.
    #[arg(long, default_value_t = 10.0)]
    r1: f64,
    /// Outer fiber radius for the census.
    #[arg(long, default_value_t = 40.0)]
    r2: f64,
}

impl Radii {
    fn options(&self, trunc: i64) -> EnumerateOptions {
        EnumerateOptions { r1: self.r1, r2: self.r2, trunc_xi: trunc, slope_tol: 0.05 }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.trim().parse().map_err(|e| format!("{e}"))?, 0.0)),
        [re, im] => Ok(Complex64::new(
            re.trim().parse().map_err(|e| format!("{e}"))?,
            im.trim().parse().map_err(|e| format!("{e}"))?,
        )),
        _ => Err("expected re,im".into()),
    }
}

/// Round every number in a JSON tree to 12 significant digits so output is
/// replayable byte for byte.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    let rounded: f64 = format!("{f:.11e}").parse().unwrap();
                    *v = json!(rounded);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn emit(cli: &Cli, mut value: Value, pretty_text: Option<String>) -> Result<(), String> {
    round_floats(&mut value);
    let body = if cli.pretty {
        match pretty_text {
            Some(t) => t,
            None => serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?,
        }
    } else {
        serde_json::to_string(&value).map_err(|e| e.to_string())?
    };
    match &cli.output {
        Some(path) => std::fs::write(path, body + "\n").map_err(|e| e.to_string()),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn cfmt(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn region_json(r: &RegionDescriptor) -> Value {
    let depths: Vec<Value> = r
        .grid
        .depths()
        .iter()
        .map(|d| match d {
            None => Value::String("inf".into()),
            Some(k) => json!(k),
        })
        .collect();
    let monomials: Vec<Value> = r
        .monomials
        .iter()
        .map(|m| json!({"re": m.coeff.re, "im": m.coeff.im, "exp": [*m.exp.numer(), *m.exp.denom()]}))
        .collect();
    json!({
        "p": r.p,
        "kneading": r.kneading.to_string(),
        "label": r.label,
        "depths": depths,
        "monomials": monomials,
        "mu": r.mu,
        "nu": r.nu,
        "series": serde_json::to_value(&r.series).unwrap(),
        "quad_center": r.quad_center.map(|c| json!([c.re, c.im])),
        "self_dual": r.self_dual,
        "sample": r.sample.map(|(a, v)| json!([a.re, a.im, v.re, v.im])),
    })
}

fn census(p: usize, opts: EnumerateOptions) -> Result<Vec<RegionDescriptor>, String> {
    enumerate_regions(p, opts).map_err(|e| format!("enumeration failed: {e}"))
}

fn sign_pattern(r: &RegionDescriptor) -> String {
    let mut out = String::new();
    for m in &r.monomials {
        if m.exp == cubicurve::Exponent::from_integer(1) {
            let c = m.coeff;
            let positive = if c.im.abs() > c.re.abs() { c.im > 0.0 } else { c.re > 0.0 };
            out.push(if positive { '+' } else { '-' });
        }
    }
    out
}

fn run(cli: &Cli) -> Result<(), String> {
    match &cli.command {
        Command::SolveSeries { kneading, signs, trunc, radii } => {
            let kn = KneadingSequence::parse(kneading).ok_or("bad kneading sequence")?;
            let regions = census(kn.period(), radii.options(*trunc))?;
            let selected: Vec<&RegionDescriptor> = regions
                .iter()
                .filter(|r| r.kneading == kn)
                .filter(|r| signs.as_deref().map(|s| sign_pattern(r) == s).unwrap_or(true))
                .collect();
            if selected.is_empty() {
                return Err("no region matches the kneading/sign filter".into());
            }
            let value = Value::Array(selected.iter().map(|r| region_json(r)).collect());
            let mut text = String::new();
            for r in &selected {
                text += &format!("{} (mu={}, nu={})\n", r.label, r.mu, r.nu);
                for (j, s) in r.series.interior().iter().enumerate() {
                    text += &format!("  u_{} = {}\n", j + 1, s);
                }
            }
            emit(cli, value, Some(text))
        }
        Command::EnumerateRegions { p, trunc, radii } => {
            let regions = census(*p, radii.options(*trunc))?;
            let value = Value::Array(regions.iter().map(region_json).collect());
            let mut text = format!("{} escape regions in S_{p}\n", regions.len());
            for r in &regions {
                text += &format!(
                    "  {:20} mu={} nu={} grid period {}\n",
                    r.label,
                    r.mu,
                    r.nu,
                    r.grid_period()
                );
            }
            emit(cli, value, Some(text))
        }
        Command::GridCheck { depths } => {
            let parsed: Option<Vec<Option<u32>>> = depths
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    if tok == "inf" || tok == "oo" {
                        Some(None)
                    } else {
                        tok.parse::<u32>().ok().map(Some)
                    }
                })
                .collect();
            let parsed = parsed.ok_or("bad depth list; use e.g. inf,0,1,1")?;
            let g = MarkedGrid::new(parsed).map_err(|e| e.to_string())?;
            let report = grid::validate_rules(&g);
            let orders: Result<Vec<_>, _> =
                (1..g.period()).map(|j| grid::ord_from_grid(&g, j)).collect();
            let orders = orders.map_err(|e| e.to_string())?;
            let mu = grid::multiplicity(&orders).map_err(|e| e.to_string())?;
            let nu = grid::winding_number(&g).map_err(|e| e.to_string())?;
            let value = json!({
                "passes_rules": report.passed(),
                "report": format!("{report:?}"),
                "kneading": g.kneading().to_string(),
                "grid_period": g.grid_period(),
                "orders": orders.iter().map(|q| json!([*q.numer(), *q.denom()])).collect::<Vec<_>>(),
                "mu": mu,
                "nu": nu,
            });
            let text = format!(
                "{}\nkneading {}  grid period {}  mu {}  nu {}\n{}",
                if report.passed() { "PASS" } else { "FAIL" },
                g.kneading(),
                g.grid_period(),
                mu,
                nu,
                g.to_ascii(g.max_finite_depth() + 2)
            );
            emit(cli, value, Some(text))
        }
        Command::Centers { r } => {
            let centers = quadratic::centers(*r).map_err(|e| e.to_string())?;
            let value = Value::Array(
                centers
                    .iter()
                    .map(|q| {
                        json!({
                            "c": [q.c.re, q.c.im],
                            "r": q.r,
                            "psi": [q.psi().re, q.psi().im],
                            "nickname": q.nickname(),
                        })
                    })
                    .collect(),
            );
            let mut text = String::new();
            for q in &centers {
                text += &format!(
                    "c = {}  psi = {}  {}\n",
                    cfmt(q.c),
                    cfmt(q.psi()),
                    q.nickname().unwrap_or("")
                );
            }
            emit(cli, value, Some(text))
        }
        Command::Euler { p, formula_only, radii } => {
            let d = geometry::degree(*p);
            let chi_affine = geometry::euler_affine(*p);
            let mut value = json!({"d": d, "chi_affine": chi_affine});
            let mut text = format!("d_{p} = {d}, chi(S_{p}) = {chi_affine}\n");
            if !formula_only {
                let regions = census(*p, radii.options(12))?;
                let n = regions.len();
                let chi_compact = geometry::euler_compact(*p, n);
                let chi_windings = geometry::euler_from_windings(&regions);
                let genus = geometry::genus_if_connected(chi_compact);
                value = json!({
                    "d": d,
                    "chi_affine": chi_affine,
                    "N": n,
                    "chi_compact": chi_compact,
                    "chi_from_windings": chi_windings,
                    "genus_if_connected": genus,
                });
                text += &format!(
                    "N_{p} = {n}, chi(S_{p} bar) = {chi_compact} (windings: {chi_windings}), genus {genus} assuming connectivity\n"
                );
            }
            emit(cli, value, Some(text))
        }
        Command::Render {
            p,
            base_file,
            label,
            base_radius,
            center,
            scale,
            size,
            steps_per_unit,
            radii,
        } => {
            let (w, h) = size
                .split_once('x')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or("bad --size; use e.g. 800x800")?;
            let base = if let Some(path) = base_file {
                let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
                let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
                let get = |k: &str| -> Result<Complex64, String> {
                    let arr = v.get(k).and_then(|x| x.as_array()).ok_or("missing field")?;
                    Ok(Complex64::new(
                        arr[0].as_f64().ok_or("bad number")?,
                        arr[1].as_f64().ok_or("bad number")?,
                    ))
                };
                CurvePoint::projected(get("a")?, get("v")?, *p).map_err(|e| e.to_string())?
            } else {
                let want = label.as_deref().ok_or("need --base-file or --label")?;
                let regions = census(*p, radii.options(12))?;
                let region = regions
                    .iter()
                    .find(|r| r.label == want)
                    .ok_or_else(|| format!("no region labelled {want}"))?;
                let (a0, v0) = region.sample.ok_or("region sample missing")?;
                let a1 = a0 / a0.norm() * *base_radius;
                let v1 = cubicurve::dynamics::continue_root(*p, a0, v0, a1)
                    .map_err(|e| e.to_string())?;
                CurvePoint { a: a1, v: v1, p: *p }
            };
            let img = geometry::render(&base, w, h, *center, *scale, *steps_per_unit);
            let path = cli.output.clone().unwrap_or_else(|| "tplane.ppm".into());
            if path.extension().map(|e| e == "png").unwrap_or(false) {
                let rgb = img.rgb();
                image::save_buffer(&path, &rgb, w as u32, h as u32, image::ColorType::Rgb8)
                    .map_err(|e| e.to_string())?;
            } else {
                let f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
                img.write_ppm(std::io::BufWriter::new(f)).map_err(|e| e.to_string())?;
            }
            eprintln!(
                "rendered {}x{} at base a={}, v={} -> {}",
                w,
                h,
                cfmt(base.a),
                cfmt(base.v),
                path.display()
            );
            Ok(())
        }
        Command::Residue { p, label, radius, samples, radii } => {
            let regions = census(*p, radii.options(12))?;
            let mut rows = Vec::new();
            for r in &regions {
                if let Some(want) = label {
                    if &r.label != want {
                        continue;
                    }
                }
                let res = geometry::residue_at_ideal(r, *radius, *samples)
                    .map_err(|e| format!("{}: {e}", r.label))?;
                rows.push(json!({
                    "label": r.label,
                    "mu": r.mu,
                    "residue": [res.re, res.im],
                    "abs": res.norm(),
                }));
            }
            if rows.is_empty() {
                return Err("no matching region".into());
            }
            let text = rows
                .iter()
                .map(|r| format!("{}  |residue| = {:.3e}\n", r["label"], r["abs"].as_f64().unwrap()))
                .collect::<String>();
            emit(cli, Value::Array(rows), Some(text))
        }
        Command::FindV { p, a, kneading, v0, tol, max_sweeps } => {
            let kn = KneadingSequence::parse(kneading).ok_or("bad kneading sequence")?;
            if kn.period() != *p {
                return Err("kneading length must equal p".into());
            }
            let mut cfg = FinderConfig::new(*a, kn);
            cfg.tol = *tol;
            cfg.max_sweeps = *max_sweeps;
            let v0 = v0.unwrap_or_else(|| {
                // random start scaled to |a|, per the construction's remark
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
                Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * a.norm()
            });
            let outcome = find_v(&cfg, v0).map_err(|e| e.to_string())?;
            let value = match &outcome {
                FinderOutcome::Converged { v, sweeps } => json!({
                    "outcome": "converged", "a": [a.re, a.im], "v": [v.re, v.im], "sweeps": sweeps,
                }),
                FinderOutcome::WrongKneading { v, found, sweeps } => json!({
                    "outcome": "wrong_kneading", "a": [a.re, a.im], "v": [v.re, v.im],
                    "found": found.as_ref().map(|k| k.to_string()), "sweeps": sweeps,
                }),
                FinderOutcome::NotConverged { last_delta } => json!({
                    "outcome": "not_converged", "last_delta": last_delta,
                }),
            };
            let text = format!("{value:#}\n");
            emit(cli, value, Some(text))
        }
        Command::RealComponents { p, orientation, mod_involution } => {
            let orient = match orientation.as_str() {
                "+" | "plus" => Some(Orientation::Plus),
                "-" | "minus" => Some(Orientation::Minus),
                "both" => None,
                _ => return Err("orientation must be +, - or both".into()),
            };
            let models = enumerate_components(*p, orient, *mod_involution);
            let rows: Vec<Value> = models
                .iter()
                .map(|m| {
                    let star = m.star_kneading();
                    let (zero, one) = star.resolutions();
                    json!({
                        "perm": m.perm,
                        "orientation": match m.orientation { Orientation::Plus => "+", Orientation::Minus => "-" },
                        "marked": m.marked,
                        "free": m.free,
                        "star_kneading": star.to_string(),
                        "endpoints": [zero.to_string(), one.to_string()],
                    })
                })
                .collect();
            let mut text = format!("{} components\n", rows.len());
            for r in &rows {
                text += &format!(
                    "  {} {}  {} -> {} .. {}\n",
                    r["orientation"].as_str().unwrap(),
                    r["perm"],
                    r["star_kneading"].as_str().unwrap(),
                    r["endpoints"][0].as_str().unwrap(),
                    r["endpoints"][1].as_str().unwrap(),
                );
            }
            emit(cli, Value::Array(rows), Some(text))
        }
        Command::ReproduceTables { which, trunc, radii } => reproduce_tables(cli, which, *trunc, radii),
    }
}

fn reproduce_tables(cli: &Cli, which: &str, trunc: i64, radii: &Radii) -> Result<(), String> {
    match which {
        "quadratic" => {
            let mut rows = Vec::new();
            let mut text = String::from("p   c1                     nickname           psi_p = lim a/t\n");
            for r in 1..=4 {
                for q in quadratic::centers(r).map_err(|e| e.to_string())? {
                    if q.c.im < -1e-12 {
                        continue; // the table lists upper-half-plane representatives
                    }
                    rows.push(json!({
                        "p": r, "c1": [q.c.re, q.c.im], "nickname": q.nickname(),
                        "psi": [q.psi().re, q.psi().im],
                    }));
                    text += &format!(
                        "{r}   {:22} {:18} {}\n",
                        cfmt(q.c),
                        q.nickname().unwrap_or(""),
                        cfmt(q.psi())
                    );
                }
            }
            emit(cli, Value::Array(rows), Some(text))
        }
        "euler" => {
            let mut rows = Vec::new();
            let mut text = String::from("p   d_p   (2-p)d_p   N_p   chi(S_p bar)\n");
            for p in 1..=4 {
                let regions = census(p, radii.options(12))?;
                let d = geometry::degree(p);
                let chi = geometry::euler_compact(p, regions.len());
                rows.push(json!({
                    "p": p, "d": d, "chi_affine": geometry::euler_affine(p),
                    "N": regions.len(), "chi_compact": chi,
                }));
                text += &format!(
                    "{p}   {d:<5} {:<10} {:<5} {chi}\n",
                    geometry::euler_affine(p),
                    regions.len()
                );
            }
            emit(cli, Value::Array(rows), Some(text))
        }
        "primitive" => {
            let mut rows = Vec::new();
            let mut text = String::from("kneading   mu   #   series (two leading terms per component)\n");
            for p in 2..=4 {
                let regions = census(p, radii.options(trunc))?;
                let mut by_row: std::collections::BTreeMap<String, Vec<&RegionDescriptor>> =
                    Default::default();
                for r in &regions {
                    if r.kneading.is_trivial() || r.grid_period() != r.p {
                        continue; // primitive, nontrivial rows only
                    }
                    let row_key = r
                        .label
                        .trim_end_matches(|c| c == '+' || c == '-')
                        .to_string();
                    by_row.entry(row_key).or_default().push(r);
                }
                for (key, group) in by_row {
                    let rep = group[0];
                    let mut first_terms = Vec::new();
                    for s in rep.series.interior() {
                        let terms: Vec<Value> = s
                            .terms()
                            .take(2)
                            .map(|(k, c)| json!({"exp": [k, s.mu()], "re": c.re, "im": c.im}))
                            .collect();
                        first_terms.push(Value::Array(terms));
                    }
                    rows.push(json!({
                        "kneading": key,
                        "count": group.len(),
                        "mu": rep.mu,
                        "two_terms": first_terms,
                    }));
                    let series_text: Vec<String> = rep
                        .series
                        .interior()
                        .iter()
                        .map(|s| {
                            s.terms()
                                .take(2)
                                .map(|(k, c)| format!("({:+.3}{:+.3}i) xi^{}/{}", c.re, c.im, k, s.mu()))
                                .collect::<Vec<_>>()
                                .join(" + ")
                        })
                        .collect();
                    text += &format!(
                        "{key:9}  {:2}   {}   {}\n",
                        rep.mu,
                        group.len(),
                        series_text.join(" | ")
                    );
                }
            }
            emit(cli, Value::Array(rows), Some(text))
        }
        "nontrivial" => {
            let mut rows = Vec::new();
            let mut text =
                String::from("p  r  kneading   m_1..m_3          t~ coeff        nu  mu  #\n");
            for p in 2..=4 {
                let regions = census(p, radii.options(trunc))?;
                let mut by_row: std::collections::BTreeMap<String, Vec<&RegionDescriptor>> =
                    Default::default();
                for r in &regions {
                    if r.kneading.is_trivial() {
                        continue;
                    }
                    let row_key = r
                        .label
                        .trim_end_matches(|c| c == '+' || c == '-')
                        .to_string();
                    by_row.entry(row_key).or_default().push(r);
                }
                for (key, group) in by_row {
                    let rep = group[0];
                    let t = geometry::t_leading(rep).map_err(|e| e.to_string())?;
                    let (t_coeff, t_exp) = match t {
                        TLeading::Monomial { coeff, exp } => (coeff, exp),
                        TLeading::Pole { .. } => unreachable!("nontrivial kneading"),
                    };
                    let monomials: Vec<String> = rep
                        .monomials
                        .iter()
                        .map(|m| {
                            format!(
                                "({:+.3}{:+.3}i)t^{}/{}",
                                m.coeff.re,
                                m.coeff.im,
                                m.exp.numer(),
                                m.exp.denom()
                            )
                        })
                        .collect();
                    rows.push(json!({
                        "p": p,
                        "r": rep.p / rep.grid_period(),
                        "kneading": key,
                        "monomials": rep.monomials.iter().map(|m| json!({
                            "re": m.coeff.re, "im": m.coeff.im,
                            "exp": [*m.exp.numer(), *m.exp.denom()],
                        })).collect::<Vec<_>>(),
                        "t_coeff": [t_coeff.re, t_coeff.im],
                        "t_exp": [*t_exp.numer(), *t_exp.denom()],
                        "nu": rep.nu,
                        "mu": rep.mu,
                        "count": group.len(),
                    }));
                    text += &format!(
                        "{p}  {}  {key:9}  {}  t~({:+.4}{:+.4}i)xi^{}/{}  {}  {}  {}\n",
                        rep.p / rep.grid_period(),
                        monomials.join(", "),
                        t_coeff.re,
                        t_coeff.im,
                        t_exp.numer(),
                        t_exp.denom(),
                        rep.nu,
                        rep.mu,
                        group.len()
                    );
                }
            }
            emit(cli, Value::Array(rows), Some(text))
        }
        _ => Err("unknown table; use primitive, nontrivial, quadratic or euler".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("CUBICURVE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            let mut err = std::io::stderr();
            let _ = writeln!(err, "error: {msg}");
            ExitCode::from(1)
        }
    }
}
