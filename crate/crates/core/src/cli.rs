//! Command-line interface: `check`, `expand`, `pn1`, `phi` and `shuffle`.
//!
//! Exit status is 0 when everything checked holds, 1 when an identity is
//! violated or two computations disagree, and 2 on usage or precondition
//! errors. Output is deterministic for a given seed and set of flags.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{parse_algebra, BaseAlgebra};
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::hom::{Embedding, StructureMap};
use crate::identities::{run_trials, Identity, OperatedModel, SeriesModel, TensorModel, Trial};
use crate::sample::Sampler;
use crate::tensor::{complete_shuffle_words, complete_shuffle_words_direct, TensorSeries};
use crate::volterra::KernelSpec;
use crate::{parse_rational, Series};

#[derive(Parser, Debug)]
#[command(name = "reynolds", version, about = "Exact checks for Volterra and free Reynolds operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check an identity on seeded random inputs
    Check {
        /// rota-baxter[=w], reynolds, weighted-differential[=w], intdiff,
        /// modified-differential, modified-leibniz, weighted-reynolds,
        /// differential-reynolds, left-inverse, modified-intdiff
        identity: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
    /// Evaluate an expression to a series, or expand products of P
    Expand {
        expr: String,
        #[command(flatten)]
        common: Common,
        /// Bind a symbol: `f=<expr>` or `f=random`
        #[arg(long = "let", value_name = "NAME=EXPR")]
        bindings: Vec<String>,
        /// Rewrite products of P into nested P words instead of evaluating
        #[arg(long)]
        rewrite: bool,
        /// Keep `lambda` as a symbol when rewriting instead of setting it to 1
        #[arg(long)]
        symbolic_lambda: bool,
    },
    /// Print P^n(1), optionally next to its closed form
    Pn1 {
        n: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        closed_form: bool,
        /// The constant μ with h = μ (1/k)'
        #[arg(long, default_value = "1")]
        mu: String,
    },
    /// Evaluate a tensor expression and map it to a series by iterated integrals
    Phi {
        expr: String,
        #[command(flatten)]
        common: Common,
        #[arg(long = "let", value_name = "NAME=EXPR")]
        bindings: Vec<String>,
    },
    /// Complete shuffle of two words given as comma-separated basis indices
    Shuffle {
        left: String,
        right: String,
        #[command(flatten)]
        common: Common,
        /// Also compute the direct enumeration and compare
        #[arg(long)]
        compare: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// exp, unit, cauchy, or k=<expr>,h=<expr>
    #[arg(long)]
    kernel: Option<String>,
    /// scalar:mu=<p/q>, scalar:lambda=<p/q>, poly, poly:max_degree=<n>,
    /// poly:rules=<file>, series:kernel=<k>:n=<n>
    #[arg(long)]
    algebra: Option<String>,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    order: u64,
    /// Overridden by the REYNOLDS_SEED environment variable
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit status. `env_seed` is the value of `REYNOLDS_SEED`, if set.
pub fn run<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let seed_override = match env_seed.map(str::parse::<u64>) {
        Some(Ok(s)) => Some(s),
        Some(Err(_)) => {
            let _ = writeln!(err, "error: REYNOLDS_SEED must be a nonnegative integer");
            return 2;
        }
        None => None,
    };
    match dispatch(cli.command, seed_override) {
        Ok(report) => {
            let _ = out.write_all(report.text.as_bytes());
            report.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let env_seed = std::env::var("REYNOLDS_SEED").ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        env_seed.as_deref(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

struct Report {
    text: String,
    status: i32,
}

impl Report {
    fn new(format: Format, json: Value, table: String, status: i32) -> Self {
        let text = match format {
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&json).expect("JSON output")),
            Format::Table => table,
        };
        Report { text, status }
    }
}

fn dispatch(command: Command, seed_override: Option<u64>) -> Result<Report> {
    match command {
        Command::Check {
            identity,
            common,
            trials,
        } => cmd_check(&identity, &resolve(common, seed_override), trials),
        Command::Expand {
            expr,
            common,
            bindings,
            rewrite,
            symbolic_lambda,
        } => cmd_expand(&expr, &resolve(common, seed_override), &bindings, rewrite, symbolic_lambda),
        Command::Pn1 {
            n,
            common,
            closed_form,
            mu,
        } => cmd_pn1(n, &resolve(common, seed_override), closed_form, &mu),
        Command::Phi { expr, common, bindings } => cmd_phi(&expr, &resolve(common, seed_override), &bindings),
        Command::Shuffle {
            left,
            right,
            common,
            compare,
        } => cmd_shuffle(&left, &right, &resolve(common, seed_override), compare),
    }
}

fn resolve(mut common: Common, seed_override: Option<u64>) -> Common {
    if let Some(s) = seed_override {
        common.seed = s;
    }
    common
}

impl Common {
    fn order(&self) -> usize {
        self.order as usize
    }

    fn kernel_spec(&self) -> Result<KernelSpec> {
        KernelSpec::parse(self.kernel.as_deref().unwrap_or("exp"))
    }

    fn algebra(&self) -> Result<Arc<dyn BaseAlgebra>> {
        parse_algebra(self.algebra.as_deref().unwrap_or("scalar:mu=1"))
    }
}

fn coeff_table(s: &Series) -> String {
    let strings = s.to_strings();
    let width = strings.iter().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for (i, c) in strings.iter().enumerate() {
        out.push_str(&format!("x^{i:<3} {c:>width$}\n"));
    }
    out
}

fn trial_json(t: &Trial) -> Value {
    json!({
        "trial": t.index,
        "checked_to": t.checked_to,
        "first_nonzero": t.failure.as_ref().map(|(order, coeff)| json!({"order": order, "coeff": coeff})),
    })
}

fn summarize(identity: &Identity, model: &str, cfg: &Common, trials: &[Trial]) -> Report {
    let failed: Vec<&Trial> = trials.iter().filter(|t| !t.passed()).collect();
    let checked_to = trials.iter().map(|t| t.checked_to).min().unwrap_or(0);
    let lowest = failed
        .iter()
        .filter_map(|t| t.failure.as_ref().map(|(o, c)| (*o, t.index, c.clone())))
        .min();
    let verdict = match &lowest {
        None => format!("zero to order {checked_to}"),
        Some((o, i, c)) => format!("nonzero at order {o} (trial {i}, coefficient {c})"),
    };
    let json = json!({
        "identity": identity.to_string(),
        "model": model,
        "order": cfg.order,
        "seed": cfg.seed,
        "trials": trials.len(),
        "failed": failed.len(),
        "verdict": verdict,
        "results": trials.iter().map(trial_json).collect::<Vec<_>>(),
    });
    let mut table = format!(
        "identity  {identity}\nmodel     {model}\nseed      {}\ntrials    {}\nfailed    {}\nverdict   {verdict}\n",
        cfg.seed,
        trials.len(),
        failed.len()
    );
    for t in &failed {
        if let Some((o, c)) = &t.failure {
            table.push_str(&format!("  trial {:>4}  order {:>3}  {c}\n", t.index, o));
        }
    }
    Report::new(cfg.format, json, table, if failed.is_empty() { 0 } else { 1 })
}

fn cmd_check(name: &str, cfg: &Common, trials: u64) -> Result<Report> {
    if trials == 0 {
        return Err(Error::Invalid("--trials must be at least 1".into()));
    }
    let identity: Identity = name.parse()?;
    let n = cfg.order();
    if let Some(desc) = &cfg.algebra {
        if cfg.kernel.is_some() {
            return Err(Error::Invalid("give either --kernel or --algebra, not both".into()));
        }
        let alg = parse_algebra(desc)?;
        let model = TensorModel::new(alg.clone(), n);
        let max_index = alg.basis_limit().map_or(2, |l| (l - 1).min(2));
        let results = run_trials(&model, &identity, trials, cfg.seed, n, |s| {
            vec![s.tensor(&alg, n, 3, 3, max_index), s.tensor(&alg, n, 3, 3, max_index)]
        })?;
        let label = format!("tensor over {} at order {n}", alg.descriptor());
        return Ok(summarize(&identity, &label, cfg, &results));
    }
    let spec = cfg.kernel_spec()?;
    let work = n + 2;
    let kernel = spec.build(work)?;
    let model = SeriesModel::volterra(&kernel);
    if identity.needs_d() && !model.has_d() {
        return Err(Error::MissingOperator("D"));
    }
    let results = run_trials(&model, &identity, trials, cfg.seed, n, |s| vec![s.series(work), s.series(work)])?;
    if let Some(t) = results.iter().find(|t| t.checked_to < n) {
        return Err(Error::OrderExceeded {
            requested: n,
            trusted: t.checked_to,
        });
    }
    Ok(summarize(&identity, &format!("volterra kernel {spec}"), cfg, &results))
}

fn d_depth(e: &Expr) -> usize {
    match e {
        Expr::D(a) => 1 + d_depth(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => d_depth(a).max(d_depth(b)),
        Expr::Pow(a, _) | Expr::P(a) | Expr::Call(_, a) => d_depth(a),
        Expr::Rational(_) | Expr::X | Expr::Symbol(_) | Expr::Lambda => 0,
    }
}

/// Binds `name=random` to a seeded random element and `name=<expr>` to the
/// expression's value, in the order given.
fn bind<M: OperatedModel>(
    model: &M,
    specs: &[String],
    seed: u64,
    mut random: impl FnMut(&mut Sampler) -> M::Elem,
) -> Result<BTreeMap<String, M::Elem>> {
    let mut sampler = Sampler::new(seed);
    let mut out = BTreeMap::new();
    for spec in specs {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("--let expects NAME=EXPR, got `{spec}`")))?;
        let name = name.trim();
        let value = value.trim();
        let elem = if value == "random" {
            random(&mut sampler)
        } else {
            expr::eval(&expr::parse(value)?, model, &out)?
        };
        out.insert(name.to_string(), elem);
    }
    Ok(out)
}

fn cmd_expand(text: &str, cfg: &Common, bindings: &[String], rewrite: bool, symbolic: bool) -> Result<Report> {
    let e = expr::parse(text)?;
    let n = cfg.order();
    if rewrite {
        let expansion = expr::reynolds_expand(&e, n, !symbolic)?;
        let terms: Vec<Value> = expansion
            .by_weight()
            .into_iter()
            .flat_map(|(w, terms)| {
                terms.into_iter().map(move |(m, c)| {
                    json!({"weight": w, "coeff": c.to_string(), "word": expr::monomial_to_expr(&m).to_string()})
                })
            })
            .collect();
        let json = json!({"expr": expansion.to_string(), "terms": terms});
        let mut table = String::new();
        for t in &terms {
            table.push_str(&format!("{:>3}  {:>8}  {}\n", t["weight"], t["coeff"].as_str().unwrap_or(""), t["word"].as_str().unwrap_or("")));
        }
        return Ok(Report::new(cfg.format, json, table, 0));
    }
    let work = n + d_depth(&e) + 1;
    let kernel = cfg.kernel_spec()?.build(work)?;
    let model = SeriesModel::volterra(&kernel);
    let env = bind(&model, bindings, cfg.seed, |s| s.series(work))?;
    let value = expr::eval(&e, &model, &env)?;
    if value.ord() < n {
        return Err(Error::OrderExceeded {
            requested: n,
            trusted: value.ord(),
        });
    }
    let value = value.truncate(n);
    Ok(Report::new(cfg.format, json!(value.to_strings()), coeff_table(&value), 0))
}

fn cmd_pn1(n: usize, cfg: &Common, closed_form: bool, mu: &str) -> Result<Report> {
    let order = cfg.order();
    let kernel = cfg.kernel_spec()?.build(order)?;
    let iterate = kernel.iterate_p(&Series::one(order), n).truncate(order);
    if !closed_form {
        return Ok(Report::new(cfg.format, json!(iterate.to_strings()), coeff_table(&iterate), 0));
    }
    let mu = parse_rational(mu)?;
    let closed = kernel.closed_form_pn1(n, &mu)?.truncate(order);
    let matched = closed == iterate;
    let json = json!({
        "n": n,
        "iterate": iterate.to_strings(),
        "closed_form": closed.to_strings(),
        "match": matched,
    });
    let (a, b) = (iterate.to_strings(), closed.to_strings());
    let wa = a.iter().map(String::len).max().unwrap_or(1).max(7);
    let mut table = format!("{:<5} {:>wa$}  {}\n", "", "iterate", "closed form");
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        table.push_str(&format!("x^{i:<3} {x:>wa$}  {y}\n"));
    }
    table.push_str(if matched { "match\n" } else { "MISMATCH\n" });
    Ok(Report::new(cfg.format, json, table, if matched { 0 } else { 1 }))
}

fn default_algebra_for(spec: &KernelSpec) -> Option<&'static str> {
    match spec {
        KernelSpec::Exp => Some("scalar:mu=1"),
        KernelSpec::Unit => Some("scalar:lambda=0"),
        KernelSpec::Cauchy => Some("poly"),
        KernelSpec::Custom { .. } => None,
    }
}

fn cmd_phi(text: &str, cfg: &Common, bindings: &[String]) -> Result<Report> {
    let e = expr::parse(text)?;
    let n = cfg.order();
    let spec = cfg.kernel_spec()?;
    let desc = match (&cfg.algebra, default_algebra_for(&spec)) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => d.to_string(),
        (None, None) => return Err(Error::Invalid("custom kernels need --algebra".into())),
    };
    let alg = parse_algebra(&desc)?;
    let sm = StructureMap::new(spec.build(n + 1)?, Embedding::Monomial);
    if !sm.verify_intertwining(alg.as_ref(), 6)? {
        return Err(Error::PreconditionViolated(format!(
            "x^i embedding of `{desc}` does not intertwine d with D_K for kernel {spec}"
        )));
    }
    let model = TensorModel::new(alg.clone(), n + 1);
    let max_index = alg.basis_limit().map_or(2, |l| (l - 1).min(2));
    let env = bind(&model, bindings, cfg.seed, |s| s.tensor(&alg, n + 1, 3, 3, max_index))?;
    let u = expr::eval(&e, &model, &env)?;
    let value = sm.evaluate(&u)?;
    if value.ord() < n {
        return Err(Error::OrderExceeded {
            requested: n,
            trusted: value.ord(),
        });
    }
    let value = value.truncate(n);
    Ok(Report::new(cfg.format, json!(value.to_strings()), coeff_table(&value), 0))
}

fn parse_word(text: &str) -> Result<Vec<usize>> {
    let word: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad basis index `{p}` in word `{text}`")))
        })
        .collect::<Result<_>>()?;
    Ok(word)
}

fn cmd_shuffle(left: &str, right: &str, cfg: &Common, compare: bool) -> Result<Report> {
    let n = cfg.order();
    let alg = cfg.algebra()?;
    let (a, b) = (parse_word(left)?, parse_word(right)?);
    if let Some(limit) = alg.basis_limit() {
        if let Some(&bad) = a.iter().chain(&b).find(|&&i| i >= limit) {
            return Err(Error::IndexOverflow { index: bad, limit });
        }
    }
    let lambda = alg.lambda()?;
    let terms = complete_shuffle_words(&a, &b, &lambda, n);
    let result = TensorSeries::from_terms(alg.clone(), n, terms.clone());
    let mut json: Value = serde_json::from_str(&result.to_json()).expect("tensor JSON");
    let mut table = String::new();
    for (w, c) in &terms {
        let names: Vec<String> = w.iter().map(|&i| alg.basis_name(i)).collect();
        table.push_str(&format!("{c:>10}  {}\n", names.join("⊗")));
    }
    let mut status = 0;
    if compare {
        let direct = complete_shuffle_words_direct(&a, &b, &lambda, n).0;
        let matched = direct == terms;
        json["match"] = json!(matched);
        table.push_str(if matched { "match\n" } else { "MISMATCH\n" });
        if !matched {
            status = 1;
        }
    }
    Ok(Report::new(cfg.format, json, table, status))
}
