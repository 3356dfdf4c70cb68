//! Command-line front end: configuration, subcommand dispatch and JSON output.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agf::{agf, b_seq, check_main_theorem, check_radius, compare_rationals, compat_violations, BRoute, BTable, DeformedLog};
use crate::check::IdentityCheck;
use crate::drinfeld::DrinfeldModule;
use crate::ff::{Field, FieldParams};
use crate::laurent::{Ctx, LaurentElem, SeriesCtx};
use crate::partitions::{count, enumerate, restrict_to_support};
use crate::periods::{legendre_check, period_report};
use crate::suite::{preset, presets, run_all, SuiteParams, CRITERIA};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "anderson", version, about = "Exact computations with Drinfeld modules over F_q[theta]")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalOpts {
    /// TOML session file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Start from a shipped preset (carlitz-q2, carlitz-q3, rank2-q2, rank3-q2).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Degree of the residue field over F_q.
    #[arg(long, global = true)]
    pub s: Option<u32>,
    /// Ramification: the uniformizer is u with u^m = 1/theta.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Target relative u-precision.
    #[arg(long, global = true)]
    pub ucap: Option<i64>,
    /// Number of t-coefficients kept.
    #[arg(long, global = true)]
    pub tprec: Option<usize>,
    /// Coefficients A_1..A_r as polynomials in theta, e.g. "1;0,1" for A_1 = 1, A_2 = theta.
    #[arg(long, global = true)]
    pub coeffs: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate shadowed partitions of rank r and size n.
    Partitions {
        r: usize,
        n: i64,
        /// Keep only partitions supported on these indices, e.g. "1,3".
        #[arg(long)]
        support: Option<String>,
    },
    /// Exponential and logarithm coefficients alpha_n, beta_n.
    Coeffs {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Convergence data of the logarithm.
    Convergence,
    /// The rational functions B_n(t) and the agreement of their three routes.
    Bseq {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Deformed logarithm of xi, given as "exp:coeff,..." in powers of theta.
    Deform {
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Anderson generating function of u, given like xi.
    Agf {
        #[arg(long, allow_hyphen_values = true)]
        u: String,
    },
    /// Check the deformed-logarithm identities at the given (or preset) xi values.
    VerifyMainthm {
        #[arg(long, allow_hyphen_values = true)]
        xi: Vec<String>,
        /// Also check this many random in-radius xi drawn from the seed.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Torsion basis and periods.
    Period,
    /// Quasi-periods and their direct series.
    Quasiperiod {
        /// Terms of the direct series.
        #[arg(long, default_value_t = 20)]
        terms: usize,
    },
    /// Legendre relation for rank 2.
    Legendre,
    /// Run the acceptance suite.
    Verify {
        /// Comma-separated criterion numbers.
        #[arg(long)]
        only: Option<String>,
    },
}

/// Everything a subcommand needs, after merging presets, file and flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub preset: Option<String>,
    pub q: u32,
    pub s: u32,
    pub m: u32,
    pub ucap: i64,
    pub tprec: usize,
    pub coeffs: Vec<Vec<u32>>,
    pub seed: u64,
    /// Explicit field tower; overrides `q` and `s` when present.
    pub field: Option<FieldParams>,
    pub suite: SuiteParams,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            preset: None,
            q: 2,
            s: 1,
            m: 1,
            ucap: 64,
            tprec: 16,
            coeffs: vec![vec![1]],
            seed: 0,
            field: None,
            suite: SuiteParams::default(),
        }
    }
}

impl SessionConfig {
    pub fn load(opts: &GlobalOpts) -> Result<Self> {
        let mut cfg = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                toml::from_str::<SessionConfig>(&text).map_err(|e| Error::Config(e.to_string()))?
            }
            None => SessionConfig::default(),
        };
        if let Some(p) = &opts.preset {
            cfg.preset = Some(p.clone());
        }
        if let Some(name) = cfg.preset.clone() {
            let p = preset(&name).ok_or_else(|| {
                let names: Vec<_> = presets().into_iter().map(|p| p.name).collect();
                Error::Config(format!("unknown preset {name:?}; known: {}", names.join(", ")))
            })?;
            cfg.q = p.q;
            cfg.s = p.s;
            cfg.m = p.m;
            cfg.coeffs = p.coeffs;
        }
        cfg.q = opts.q.unwrap_or(cfg.q);
        cfg.s = opts.s.unwrap_or(cfg.s);
        cfg.m = opts.m.unwrap_or(cfg.m);
        cfg.ucap = opts.ucap.unwrap_or(cfg.ucap);
        cfg.tprec = opts.tprec.unwrap_or(cfg.tprec);
        cfg.seed = opts.seed.unwrap_or(cfg.seed);
        if let Some(c) = &opts.coeffs {
            cfg.coeffs = parse_coeffs(c)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.ucap < 1 {
            return Err(Error::Config("ucap must be positive".into()));
        }
        if self.tprec < 1 {
            return Err(Error::Config("tprec must be positive".into()));
        }
        if self.coeffs.iter().all(|c| c.iter().all(|&x| x == 0)) {
            return Err(Error::Config("at least one coefficient A_i must be nonzero".into()));
        }
        if let Some(f) = &self.field {
            if f.q() != self.q as u64 || f.s != self.s {
                return Err(Error::Config(format!("field tower has q = {}, s = {} but the session says q = {}, s = {}", f.q(), f.s, self.q, self.s)));
            }
        }
        Ok(())
    }

    fn field(&self) -> Result<Field> {
        let f = match &self.field {
            Some(p) => Field::new(p.clone()),
            None => Field::standard(self.q, self.s),
        };
        f.map_err(|e| Error::Config(e.to_string()))
    }

    pub fn ctx(&self, prec: i64) -> Result<Ctx> {
        SeriesCtx::new(self.field()?, self.m, prec).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn module(&self, ctx: &Ctx) -> Result<DrinfeldModule> {
        DrinfeldModule::from_polys(ctx, &self.coeffs).map_err(|e| Error::Config(e.to_string()))
    }
}

/// `"1;0,1"` is `A_1 = 1`, `A_2 = θ`; coefficients low to high.
pub fn parse_coeffs(s: &str) -> Result<Vec<Vec<u32>>> {
    s.split(';')
        .map(|poly| {
            let poly = poly.trim();
            if poly.is_empty() {
                return Ok(vec![]);
            }
            poly.split(',')
                .map(|c| c.trim().parse::<u32>().map_err(|e| Error::Config(format!("bad coefficient {c:?}: {e}"))))
                .collect()
        })
        .collect()
}

/// `"0:1,-1:1"` is `1 + 1/θ`: comma-separated `exponent:coefficient` pairs.
pub fn parse_element(ctx: &Ctx, s: &str) -> Result<LaurentElem> {
    let q = ctx.q();
    let mut terms = Vec::new();
    for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (e, c) = term.split_once(':').unwrap_or((term, "1"));
        let e = e.trim().parse::<i64>().map_err(|err| Error::InvalidElement(format!("bad exponent in {term:?}: {err}")))?;
        let c = c.trim().parse::<u32>().map_err(|err| Error::InvalidElement(format!("bad coefficient in {term:?}: {err}")))?;
        if c as u64 >= q {
            return Err(Error::InvalidElement(format!("coefficient {c} is not in F_{q}")));
        }
        let c = ctx.field().from_base(c)?;
        terms.push((e, c));
    }
    Ok(LaurentElem::from_theta_terms(ctx, terms))
}

/// Draws an `F_q`-combination of `θ^top, ..., θ^(top-3)`, where `θ^top` is the
/// largest power of `θ` meeting the compatibility precondition.
fn random_xi(ctx: &Ctx, phi: &DrinfeldModule, rng: &mut ChaCha8Rng) -> Result<LaurentElem> {
    let r = phi.convergence_data()?.logq_r;
    let mut top = r.ceil().to_integer() - 1;
    while !compat_violations(phi, &LaurentElem::theta_pow(ctx, top))?.is_empty() {
        top -= 1;
    }
    let q = ctx.q() as u32;
    let mut terms = vec![(top, ctx.field().from_base(rng.gen_range(1..q))?)];
    for e in (top - 3)..top {
        terms.push((e, ctx.field().from_base(rng.gen_range(0..q))?));
    }
    Ok(LaurentElem::from_theta_terms(ctx, terms))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::InvalidElement(_) | Error::InvalidField(_) => 2,
        e if e.is_precondition() => 3,
        _ => 1,
    }
}

struct Out<W: Write> {
    w: W,
    ok: bool,
}

impl<W: Write> Out<W> {
    fn line(&mut self, v: &Value) {
        let _ = writeln!(self.w, "{v}");
    }

    fn checks(&mut self, checks: &[IdentityCheck]) {
        self.ok &= checks.iter().all(|c| c.passed);
    }
}

/// Runs a parsed command, writing JSON lines to `w`. Returns the exit code.
pub fn run<W: Write>(cli: &Cli, w: W) -> i32 {
    let mut out = Out { w, ok: true };
    let res = SessionConfig::load(&cli.opts).and_then(|cfg| dispatch(&cli.cmd, &cfg, &mut out));
    match res {
        Ok(()) if out.ok => 0,
        Ok(()) => 1,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            out.line(&json!({ "error": e.to_string(), "exit_code": code }));
            code
        }
    }
}

fn dispatch<W: Write>(cmd: &Command, cfg: &SessionConfig, out: &mut Out<W>) -> Result<()> {
    let u = cfg.ucap;
    match cmd {
        Command::Partitions { r, n, support } => {
            if *r == 0 || *r > 62 || *n > 62 {
                return Err(Error::InvalidInput(format!("need 1 <= r <= 62 and n <= 62, got r = {r}, n = {n}")));
            }
            let mut parts = enumerate(*r, *n);
            if let Some(s) = support {
                let idx = s
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|e| Error::InvalidInput(format!("bad support index {x:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                parts = restrict_to_support(parts, &idx);
            }
            for p in &parts {
                out.line(&json!({ "sets": p.sets() }));
            }
            let mut summary = json!({ "r": r, "n": n, "count": parts.len() });
            if support.is_none() {
                let expected = count(*r, *n);
                summary["expected"] = json!(expected.to_string());
                out.ok &= parts.len() as u128 == expected;
            }
            out.line(&summary);
        }
        Command::Coeffs { n } => {
            let ctx = cfg.ctx(2 * u)?;
            let phi = cfg.module(&ctx)?;
            let alpha_rec = phi.alpha_recurrence(*n)?;
            let beta_inv = DrinfeldModule::beta_inversion(&alpha_rec);
            for k in 0..=*n {
                let a = phi.alpha_closed(k)?;
                let b = phi.beta_closed(k)?;
                let checks = vec![
                    IdentityCheck::scalar("alpha closed = recurrence", &[&a], &[&alpha_rec[k]], u),
                    IdentityCheck::scalar("beta closed = inversion", &[&b], &[&beta_inv[k]], u),
                ];
                out.checks(&checks);
                out.line(&json!({
                    "n": k,
                    "alpha": a.truncate_rel(u).to_json(),
                    "beta": b.truncate_rel(u).to_json(),
                    "checks": checks,
                }));
            }
        }
        Command::Convergence => {
            let ctx = cfg.ctx(u)?;
            let phi = cfg.module(&ctx)?;
            let cd = phi.convergence_data()?;
            out.line(&json!({
                "support": cd.support,
                "ratios": cd.ratios.iter().map(|r| r.map(|x| x.to_string())).collect::<Vec<_>>(),
                "s": cd.s,
                "strict": cd.strict,
                "logq_r": cd.logq_r.to_string(),
            }));
        }
        Command::Bseq { n } => {
            let ctx = cfg.ctx(2 * u)?;
            let phi = cfg.module(&ctx)?;
            let d = b_seq(&phi, *n, BRoute::Definition);
            let tw = b_seq(&phi, *n, BRoute::TwistRecurrence);
            let un = b_seq(&phi, *n, BRoute::UntwistedRecurrence);
            for k in 0..=*n {
                let checks = vec![
                    compare_rationals("definition = twist recurrence", &d[k], &tw[k], &ctx, u),
                    compare_rationals("definition = untwisted recurrence", &d[k], &un[k], &ctx, u),
                ];
                out.checks(&checks);
                out.line(&json!({ "n": k, "b": d[k].to_json(), "checks": checks }));
            }
        }
        Command::Deform { xi } => {
            let ctx = cfg.ctx(2 * u)?;
            let phi = cfg.module(&ctx)?;
            let xi = parse_element(&ctx, xi)?;
            check_radius(&phi.convergence_data()?, &xi)?;
            let mut table = BTable::new(&phi, cfg.tprec);
            let l = DeformedLog::new(&mut table, &xi)?;
            let coeffs: Vec<_> = l.series.coeffs().iter().map(|c| c.truncate_rel(u).to_json()).collect();
            out.line(&json!({
                "xi": xi.to_json(),
                "n_terms": l.n_terms,
                "value": coeffs,
                "tail_logq_bound": l.tail_logq_bound.map(|d| d.to_string()),
            }));
        }
        Command::Agf { u: elem } => {
            let ctx = cfg.ctx(2 * u)?;
            let phi = cfg.module(&ctx)?;
            let x = parse_element(&ctx, elem)?;
            let f = agf(&phi, &x, cfg.tprec)?;
            let coeffs: Vec<_> = f.series.coeffs().iter().map(|c| c.truncate_rel(u).to_json()).collect();
            let residues: Vec<_> = (0..=f.n_terms.min(4)).map(|n| f.residue(n).truncate_rel(u).to_json()).collect();
            out.line(&json!({
                "u": x.to_json(),
                "n_terms": f.n_terms,
                "value": coeffs,
                "residues": residues,
                "tail_logq_bound": f.tail_logq_bound.map(|d| d.to_string()),
            }));
        }
        Command::VerifyMainthm { xi, random } => {
            let ctx = cfg.ctx(u)?;
            let phi = cfg.module(&ctx)?;
            let mut xis = xi.iter().map(|s| parse_element(&ctx, s)).collect::<Result<Vec<_>>>()?;
            if xis.is_empty() && *random == 0 {
                let p = cfg.preset.as_deref().and_then(preset).ok_or_else(|| Error::InvalidInput("give --xi or --random, or use a preset".into()))?;
                xis = p.xi_values(&ctx);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..*random {
                xis.push(random_xi(&ctx, &phi, &mut rng)?);
            }
            for x in &xis {
                let rep = check_main_theorem(&phi, x, cfg.tprec, u)?;
                out.checks(&rep.checks);
                out.line(&serde_json::to_value(&rep).expect("report serializes"));
            }
        }
        Command::Period | Command::Quasiperiod { .. } => {
            let terms = match cmd {
                Command::Quasiperiod { terms } => *terms,
                _ => cfg.suite.qp_terms,
            };
            let ctx = cfg.ctx(u)?;
            let phi = cfg.module(&ctx)?;
            let rep = period_report(&phi, u, terms)?;
            let branch = json!({ "ell": rep.ell, "torsion_basis": rep.zetas });
            let (value, checks): (Value, Vec<&IdentityCheck>) = if matches!(cmd, Command::Period) {
                (json!(rep.omegas), rep.checks.iter().filter(|c| !c.identity.starts_with("eta")).collect())
            } else {
                (json!(rep.etas), rep.checks.iter().filter(|c| c.identity.starts_with("eta")).collect())
            };
            out.ok &= checks.iter().all(|c| c.passed);
            let residuals: Vec<_> = checks.iter().map(|c| c.residual_valuation).collect();
            out.line(&json!({
                "value": value,
                "residual_valuations": residuals,
                "branch_choices": branch,
                "checks": checks,
            }));
        }
        Command::Legendre => {
            let ctx = cfg.ctx(u)?;
            let phi = cfg.module(&ctx)?;
            let rep = legendre_check(&phi, u, cfg.tprec)?;
            out.ok &= rep.passed();
            let residuals: Vec<_> = rep.checks.iter().map(|c| c.residual_valuation).collect();
            out.line(&json!({
                "value": rep.legendre_value,
                "c": rep.c,
                "residual_valuations": residuals,
                "branch_choices": { "neg_b_root": rep.neg_b_root },
                "carlitz_period": rep.carlitz_period,
                "checks": rep.checks,
            }));
        }
        Command::Verify { only } => {
            let only = only
                .as_ref()
                .map(|s| {
                    s.split(',')
                        .map(|x| x.trim().parse::<u32>().map_err(|e| Error::InvalidInput(format!("bad criterion {x:?}: {e}"))))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            if let Some(bad) = only.iter().flatten().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
                return Err(Error::InvalidInput(format!("no criterion {bad}; criteria are numbered 1 to {}", CRITERIA.len())));
            }
            let results = run_all(&cfg.suite, only.as_deref());
            let mut passed = 0;
            for r in &results {
                eprintln!("{} criterion {:2} ({}): {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.detail);
                passed += r.passed as usize;
                out.line(&serde_json::to_value(r).expect("result serializes"));
            }
            out.ok &= passed == results.len();
            out.line(&json!({ "passed": passed, "total": results.len() }));
        }
    }
    Ok(())
}
