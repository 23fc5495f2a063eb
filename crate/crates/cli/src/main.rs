use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use chaotic_cavity::algebra::{format_rational, parse_rational, to_f64, Rational};
use chaotic_cavity::asymptotics as asy;
use chaotic_cavity::conductance::conductance_prefix;
use chaotic_cavity::jointcsn::{altland_identity_check, gaussian_factorization_check, joint_cumulants};
use chaotic_cavity::montecarlo as mc;
use chaotic_cavity::verify::{self, Statistic};
use chaotic_cavity::wigner::{wigner_cumulants, wigner_prefix};
use chaotic_cavity::{DelayParams, Error, TransportParams};

#[derive(Parser)]
#[command(name = "cavity", version, about = "Cumulants of conductance, shot noise and Wigner delay time in chaotic cavities")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Exact finite-n cumulants.
    #[command(subcommand)]
    Cumulants(CumulantsCmd),
    /// Leading-order limits as n grows.
    #[command(subcommand)]
    Asymptotic(AsymptoticCmd),
    /// Identity and residual checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Monte Carlo sampling.
    #[command(subcommand)]
    Mc(McCmd),
    /// Recompute the table of limiting delay-time cumulants.
    Report {
        /// Comma-separated dimensions for the extrapolation.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u64>>,
    },
}

#[derive(Args, Clone)]
struct Transport {
    #[arg(long)]
    beta: u32,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
    alpha: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
    delta: String,
    #[arg(long)]
    n: u64,
}

impl Transport {
    fn params(&self) -> Result<TransportParams, Error> {
        TransportParams::new(self.beta, parse_rational(&self.alpha)?, parse_rational(&self.delta)?, self.n)
    }
}

#[derive(Subcommand)]
enum CumulantsCmd {
    Conductance {
        #[command(flatten)]
        t: Transport,
        #[arg(long)]
        max_order: usize,
    },
    Joint {
        #[command(flatten)]
        t: Transport,
        #[arg(long)]
        max_l: usize,
        #[arg(long)]
        max_k: usize,
    },
    Wigner {
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        n: u64,
        /// Exponent b of the delay-time weight (default 3 beta n / 2 + 2 - beta).
        #[arg(long, allow_hyphen_values = true, value_parser = rational_arg)]
        b: Option<String>,
        #[arg(long)]
        max_order: usize,
    },
}

#[derive(Subcommand)]
enum AsymptoticCmd {
    Conductance {
        #[arg(long)]
        beta: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        delta: String,
        #[arg(long)]
        max_index: usize,
    },
    Joint {
        #[arg(long)]
        beta: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        delta: String,
        /// Largest l + k.
        #[arg(long)]
        max_index: usize,
    },
    Wigner {
        #[arg(long, default_value_t = 2)]
        beta: u32,
        #[arg(long)]
        max_index: usize,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u64>>,
    },
    /// Richardson extrapolation of exact finite-n values.
    Extrapolate {
        /// Use exact recurrence values (the only supported source).
        #[arg(long, default_value_t = true)]
        from_exact: bool,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
        /// conductance:L, joint:L,K or wigner:L
        #[arg(long)]
        target: String,
        #[arg(long)]
        beta: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        delta: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Conductance,
    Joint,
    Wigner,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatArg {
    G,
    P,
    Mixed,
}

#[derive(Subcommand)]
enum VerifyCmd {
    Altland {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        max_k: usize,
    },
    GaussFactor {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        w: f64,
    },
    Chazy {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        order: usize,
    },
    Ode {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        beta: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        delta: String,
        #[arg(long)]
        n: u64,
        /// Order in z (or the single order for the ODEs).
        #[arg(long)]
        order: usize,
        /// Order in w for the joint equation.
        #[arg(long, default_value_t = 2)]
        order_w: usize,
    },
    Jacobi {
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        kmax: usize,
    },
    /// Quadrature moments against the exact recurrences (n <= 3).
    Oracle {
        #[command(flatten)]
        t: Transport,
        #[arg(long, value_enum, default_value_t = StatArg::G)]
        statistic: StatArg,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McStat {
    #[value(name = "tauW")]
    TauW,
    #[value(name = "G")]
    G,
    #[value(name = "P")]
    P,
}

#[derive(Subcommand)]
enum McCmd {
    Sample {
        #[arg(long, value_enum)]
        statistic: McStat,
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = rational_arg)]
        delta: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Edgeworth and Gaussian curves with a Monte Carlo histogram of tau_W.
    Edgeworth {
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        n: u64,
        /// a:b:steps
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

enum Payload {
    Json(Value),
    Csv(String),
    Markdown(String),
}

struct Outcome {
    params: Value,
    payload: Payload,
    /// A completed check that did not pass.
    failed_check: bool,
}

impl Outcome {
    fn json(params: Value, v: Value) -> Self {
        Outcome { params, payload: Payload::Json(v), failed_check: false }
    }
}

fn rational_arg(s: &str) -> Result<String, String> {
    parse_rational(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn fail(msg: String) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2)
}

fn rationals(v: &[Rational]) -> Value {
    json!({
        "values": v.iter().map(format_rational).collect::<Vec<_>>(),
        "floats": v.iter().map(to_f64).collect::<Vec<_>>(),
    })
}

fn tp_json(p: &TransportParams) -> Value {
    serde_json::to_value(p).expect("serialisable params")
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable report")
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Cumulants(c) => cumulants(c, cli.format),
        Command::Asymptotic(c) => asymptotic(c),
        Command::Verify(c) => verify_cmd(c),
        Command::Mc(c) => mc_cmd(c),
        Command::Report { n_list } => report(n_list.as_deref().unwrap_or(&asy::DEFAULT_N_LIST), cli.format),
    }
}

fn cumulants(c: &CumulantsCmd, format: Format) -> Result<Outcome, Error> {
    match c {
        CumulantsCmd::Conductance { t, max_order } => {
            let p = t.params()?;
            if *max_order == 0 {
                return Err(Error::InvalidOrder("max order must be positive".into()));
            }
            let s = conductance_prefix(&p, *max_order)?;
            let mut v = rationals(&s.values);
            v["params"] = tp_json(&p);
            v["lattice_radius"] = json!(s.lattice_radius);
            v["extended_validity"] = json!(s.extended_validity);
            let payload = if format == Format::Csv { Payload::Csv(index_csv(&s.values)) } else { Payload::Json(v) };
            Ok(Outcome { params: tp_json(&p), payload, failed_check: false })
        }
        CumulantsCmd::Joint { t, max_l, max_k } => {
            let p = t.params()?;
            let tab = joint_cumulants(&p, *max_l, *max_k)?;
            let entries: Vec<Value> = tab
                .values
                .iter()
                .map(|((l, k), v)| json!({"l": l, "k": k, "value": format_rational(v), "float": to_f64(v)}))
                .collect();
            let v = json!({"params": tp_json(&p), "entries": entries, "lattice_radius": tab.lattice_radius});
            Ok(Outcome::json(tp_json(&p), v))
        }
        CumulantsCmd::Wigner { beta, n, b, max_order } => {
            let b = b.as_deref().map(parse_rational).transpose()?;
            let p = DelayParams::new(*beta, *n, b)?;
            let d = if *max_order >= 3 { wigner_cumulants(&p, *max_order)? } else { wigner_prefix(&p, *max_order)? };
            let mut v = rationals(&d.values);
            let pj = to_json(&p);
            v["params"] = pj.clone();
            v["lattice"] = to_json(&d.lattice_note);
            let payload = if format == Format::Csv { Payload::Csv(index_csv(&d.values)) } else { Payload::Json(v) };
            Ok(Outcome { params: pj, payload, failed_check: false })
        }
    }
}

fn index_csv(v: &[Rational]) -> String {
    let mut s = String::from("index,value,float\n");
    for (i, x) in v.iter().enumerate() {
        s += &format!("{},{},{}\n", i + 1, format_rational(x), to_f64(x));
    }
    s
}

fn limit_params(beta: u32, alpha: &str, delta: &str) -> Result<TransportParams, Error> {
    TransportParams::new(beta, parse_rational(alpha)?, parse_rational(delta)?, 1)
}

fn limit_params_json(p: &TransportParams) -> Value {
    json!({"beta": p.beta, "alpha": format_rational(&p.alpha), "delta": format_rational(&p.delta)})
}

fn asymptotic(c: &AsymptoticCmd) -> Result<Outcome, Error> {
    match c {
        AsymptoticCmd::Conductance { beta, alpha, delta, max_index } => {
            let p = limit_params(*beta, alpha, delta)?;
            let v = asy::conductance_limits(&p, *max_index)?;
            Ok(Outcome::json(limit_params_json(&p), json!({"params": limit_params_json(&p), "limits": to_json(&v)})))
        }
        AsymptoticCmd::Joint { beta, alpha, delta, max_index } => {
            let p = limit_params(*beta, alpha, delta)?;
            let v = asy::joint_limits(&p, *max_index)?;
            Ok(Outcome::json(limit_params_json(&p), json!({"params": limit_params_json(&p), "limits": to_json(&v)})))
        }
        AsymptoticCmd::Wigner { beta, max_index, n_list } => {
            let params = json!({"beta": beta});
            if *beta == 2 {
                let v = asy::limit_wigner(*max_index)?;
                return Ok(Outcome::json(params.clone(), json!({"params": params, "limits": to_json(&v)})));
            }
            chaotic_cavity::ensembles::check_beta(*beta)?;
            let ns = n_list.as_deref().unwrap_or(&asy::DEFAULT_N_LIST);
            let ex = asy::extrapolate_wigner(*beta, *max_index, ns)?;
            let rows: Vec<Value> = ex
                .iter()
                .enumerate()
                .map(|(i, e)| json!({"l": i + 1, "scaling_exponent": asy::nu_wigner(i + 1), "estimate": e.estimate, "error": e.error}))
                .collect();
            Ok(Outcome::json(params.clone(), json!({"params": params, "n_list": ns, "extrapolated": rows})))
        }
        AsymptoticCmd::Extrapolate { from_exact, n_list, target, beta, alpha, delta } => {
            if !from_exact {
                fail("only --from-exact extrapolation is supported".into());
            }
            let (kind, idx) = target.split_once(':').unwrap_or_else(|| fail(format!("bad target '{target}'")));
            let nums: Vec<usize> = idx
                .split(',')
                .map(|x| x.trim().parse().unwrap_or_else(|_| fail(format!("bad index in target '{target}'"))))
                .collect();
            let mut samples = Vec::new();
            let (nu, limit) = match (kind, nums.as_slice()) {
                ("wigner", [l]) => {
                    for &n in n_list {
                        let d = wigner_prefix(&DelayParams::default_for(*beta, n), *l)?;
                        samples.push((n, d.values[l - 1].clone()));
                    }
                    let lim = (*beta == 2).then(|| asy::limit_wigner_values(*l)[l - 1].clone());
                    (asy::nu_wigner(*l), lim)
                }
                ("conductance", [l]) | ("joint", [l, _]) => {
                    let k = nums.get(1).copied().unwrap_or(0);
                    for &n in n_list {
                        let p = TransportParams::new(*beta, parse_rational(alpha)?, parse_rational(delta)?, n)?;
                        let v = if k == 0 { conductance_prefix(&p, *l)?.values[l - 1].clone() } else { joint_cumulants(&p, *l, k)?.get(*l, k).clone() };
                        samples.push((n, v));
                    }
                    let lp = limit_params(*beta, alpha, delta)?;
                    (asy::nu_joint(*l, k), asy::limit_joint(&lp, *l, k).ok())
                }
                _ => fail(format!("bad target '{target}': use conductance:L, joint:L,K or wigner:L")),
            };
            let e = asy::extrapolate_limit(&samples, nu)?;
            let params = json!({"beta": beta, "alpha": alpha, "delta": delta, "target": target, "n_list": n_list});
            let v = json!({
                "params": params,
                "scaling_exponent": nu,
                "estimate": e.estimate,
                "error": e.error,
                "levels": e.levels,
                "exact_limit": limit.as_ref().map(format_rational),
            });
            Ok(Outcome::json(params, v))
        }
    }
}

fn checked(params: Value, report: Value, pass: bool) -> Outcome {
    Outcome { params, payload: Payload::Json(report), failed_check: !pass }
}

fn verify_cmd(c: &VerifyCmd) -> Result<Outcome, Error> {
    match c {
        VerifyCmd::Altland { n, max_k } => {
            let r = altland_identity_check(*n, *max_k)?;
            Ok(checked(json!({"n": n, "max_k": max_k}), to_json(&r), r.pass))
        }
        VerifyCmd::GaussFactor { n, w } => {
            let r = gaussian_factorization_check(*n, *w)?;
            Ok(checked(json!({"n": n, "w": w}), to_json(&r), r.pass))
        }
        VerifyCmd::Chazy { n, order } => {
            let r = verify::chazy_report(*n, *order)?;
            let pass = r.pass;
            Ok(checked(json!({"n": n, "order": order}), to_json(&r), pass))
        }
        VerifyCmd::Ode { which, beta, alpha, delta, n, order, order_w } => {
            let r = match which {
                Which::Conductance => {
                    let p = TransportParams::new(*beta, parse_rational(alpha)?, parse_rational(delta)?, *n)?;
                    verify::ode_residual_conductance(&p, *order)?
                }
                Which::Joint => {
                    let p = TransportParams::new(*beta, parse_rational(alpha)?, parse_rational(delta)?, *n)?;
                    verify::pde_residual_joint(&p, *order, *order_w)?
                }
                Which::Wigner => verify::ode_residual_wigner(&DelayParams::new(*beta, *n, None)?, *order)?,
            };
            let pass = r.pass;
            Ok(checked(json!({"beta": beta, "alpha": alpha, "delta": delta, "n": n, "order": order}), to_json(&r), pass))
        }
        VerifyCmd::Jacobi { lmax, kmax } => {
            let r = verify::jacobi_identity_check(*lmax, *kmax);
            Ok(checked(json!({"lmax": lmax, "kmax": kmax}), to_json(&r), r.pass))
        }
        VerifyCmd::Oracle { t, statistic, max_order, tolerance } => {
            let p = t.params()?;
            let stat = match statistic {
                StatArg::G => Statistic::G,
                StatArg::P => Statistic::P,
                StatArg::Mixed => Statistic::Mixed,
            };
            let r = verify::oracle_comparison(&p, stat, *max_order, *tolerance)?;
            Ok(checked(tp_json(&p), to_json(&r), r.pass))
        }
    }
}

fn parse_grid(g: &str) -> Vec<f64> {
    let parts: Vec<&str> = g.split(':').collect();
    fn bad(g: &str) -> ! {
        fail(format!("bad grid '{g}': expected a:b:steps"))
    }
    if parts.len() != 3 {
        bad(g);
    }
    let a: f64 = parts[0].parse().unwrap_or_else(|_| bad(g));
    let b: f64 = parts[1].parse().unwrap_or_else(|_| bad(g));
    let m: usize = parts[2].parse().unwrap_or_else(|_| bad(g));
    if m < 2 || b <= a {
        bad(g);
    }
    (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
}

fn mc_cmd(c: &McCmd) -> Result<Outcome, Error> {
    match c {
        McCmd::Sample { statistic, beta, n, alpha, delta, count, seed } => {
            let (batch, params) = match statistic {
                McStat::TauW => {
                    let p = DelayParams::new(*beta, *n, None)?;
                    (mc::sample_delay_times(&p, *count, *seed)?, to_json(&p))
                }
                McStat::G | McStat::P => {
                    let p = TransportParams::new(*beta, parse_rational(alpha)?, parse_rational(delta)?, *n)?;
                    let s = mc::sample_jacobi_spectrum(&p, *count, *seed)?;
                    (if *statistic == McStat::G { s.g } else { s.p }, tp_json(&p))
                }
            };
            let mut csv = String::from("index,value\n");
            for (i, v) in batch.values.iter().enumerate() {
                csv += &format!("{i},{v:.17e}\n");
            }
            let params = json!({"params": params, "statistic": format!("{:?}", batch.statistic), "seed": seed, "count": count});
            Ok(Outcome { params, payload: Payload::Csv(csv), failed_check: false })
        }
        McCmd::Edgeworth { beta, n, grid, count, seed } => {
            let x = parse_grid(grid);
            let p = DelayParams::new(*beta, *n, None)?;
            let k = wigner_prefix(&p, 5)?;
            let kf: [f64; 5] = std::array::from_fn(|i| to_f64(&k.values[i]));
            let e = mc::edgeworth_density(&kf, &x)?;
            let g = mc::gaussian_density(kf[0], kf[1], &x)?;
            let batch = mc::sample_delay_times(&p, *count, *seed)?;
            // Histogram bins centred on the grid points.
            let h = x[1] - x[0];
            let cmp = mc::histogram_comparison(&batch.values, &kf, x[0] - h / 2.0, x[x.len() - 1] + h / 2.0, x.len())?;
            let mut csv = String::from("x,edgeworth,gaussian,histogram_density\n");
            for i in 0..x.len() {
                csv += &format!("{:.10e},{:.10e},{:.10e},{:.10e}\n", x[i], e[i], g[i], cmp.histogram[i]);
            }
            let params = json!({"params": to_json(&p), "grid": grid, "count": count, "seed": seed,
                "sup_edgeworth": cmp.sup_edgeworth, "sup_gaussian": cmp.sup_gaussian});
            Ok(Outcome { params, payload: Payload::Csv(csv), failed_check: false })
        }
    }
}

fn report(n_list: &[u64], format: Format) -> Result<Outcome, Error> {
    let rows = asy::wigner_limit_table(n_list)?;
    let params = json!({"n_list": n_list});
    if format == Format::Markdown {
        let mut md = String::from("# Limiting delay-time cumulants\n\n");
        md += &format!("Dimensions used for extrapolation: {n_list:?}\n\n");
        md += "| beta | l | listed | computed | error | rel. deviation | note |\n|---|---|---|---|---|---|---|\n";
        for r in &rows {
            let computed = r.exact.clone().unwrap_or_else(|| format!("{:.10e}", r.estimate));
            md += &format!(
                "| {} | {} | {} | {} | {:.1e} | {:.1e} | {} |\n",
                r.beta,
                r.l,
                r.reference,
                computed,
                r.error,
                r.relative_deviation,
                r.flag.clone().unwrap_or_default()
            );
        }
        return Ok(Outcome { params, payload: Payload::Markdown(md), failed_check: false });
    }
    Ok(Outcome::json(params.clone(), json!({"params": params, "rows": to_json(&rows)})))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest(argv: &[String], params: &Value, body: &str) -> Value {
    let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command_line": argv,
        "params": params,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": ts,
        "checksum_sha256": sha256_hex(body.as_bytes()),
    })
}

/// Writes via a temporary file so no partial output survives a failure.
fn write_atomic(path: &Path, body: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, body)?;
    std::fs::rename(&tmp, path)
}

fn emit(out: Option<&Path>, argv: &[String], o: Outcome) -> std::io::Result<()> {
    match o.payload {
        Payload::Json(v) => {
            let body = serde_json::to_string(&v).expect("json");
            let doc = json!({"manifest": manifest(argv, &o.params, &body), "result": v});
            let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
            match out {
                Some(p) => write_atomic(p, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            }
        }
        Payload::Csv(body) | Payload::Markdown(body) => {
            let m = serde_json::to_string_pretty(&manifest(argv, &o.params, &body)).expect("json") + "\n";
            match out {
                Some(p) => {
                    let mp = PathBuf::from(format!("{}.manifest.json", p.display()));
                    write_atomic(p, &body)?;
                    write_atomic(&mp, &m)
                }
                None => {
                    std::io::stdout().write_all(body.as_bytes())?;
                    std::io::stderr().write_all(m.as_bytes())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            let failed = o.failed_check;
            if let Err(e) = emit(cli.out.as_deref(), &argv, o) {
                eprintln!("error: io: {e}");
                return ExitCode::from(1);
            }
            if failed {
                eprintln!("error: check-failed");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
