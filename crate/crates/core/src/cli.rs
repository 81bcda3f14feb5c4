//! The `hecke` command line: computations, the structure-constant cache and
//! the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hecke::{satake_closed_form, satake_oracle, HeckeElement};
use crate::jacquet::jacquet_report;
use crate::padic::{convolve_oracle, spread_bound};
use crate::quotient::{
    annihilator_check, build_quotient, composition_factors, factor_list, is_regular, orbit,
    OrbitPoint,
};
use crate::scalars::{check_prime, QuadScalar};
use crate::suite::{run_suite, SUITES};
use crate::symfun::Partition;

const SCALAR_HELP: &str = "\
Scalars are exact elements of Q(sqrt p) written a/b+c/d*s with s^2 = p,
for example 2, -1/2, s, 3*s, 1/2-1/3*s. Characters (--chi) are
comma-separated scalars; cocharacters (--lambda, --mu) are weakly
decreasing comma-separated integers.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.";

#[derive(Parser, Debug)]
#[command(name = "hecke", version, about = "Exact spherical Hecke algebra computations for GL_n over Q_p", after_help = SCALAR_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Rank of GL_n.
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,

    /// The residue characteristic.
    #[arg(long, global = true, default_value_t = 2)]
    p: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Structure-constant cache for `convolve --oracle`
    /// [default: hecke-cache-n<N>-p<P>.json].
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Truncation level of the constant-term integral for `satake --oracle`.
    #[arg(long, global = true)]
    truncation: Option<u32>,

    /// Seed for the randomized verification cases.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Satake transform of T_lambda.
    Satake {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Also evaluate the constant-term oracle (n = 2) and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// The product T_lambda * T_mu in the double coset basis.
    Convolve {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        /// Cross-check against coset enumeration (n = 2, 3) through the cache.
        #[arg(long)]
        oracle: bool,
    },
    /// The quotient A/mA for the orbit of chi, with its composition factors.
    Quotient {
        #[arg(long, allow_hyphen_values = true)]
        chi: String,
    },
    /// Jacquet multisets of W(I,K) and of the principal series at chi.
    Jacquet {
        #[arg(long, allow_hyphen_values = true)]
        chi: String,
    },
    /// The W-orbit of chi and whether it is regular.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        chi: String,
    },
    /// Run a verification suite: satake, convolve, hecke, quotient,
    /// factors, jacquet, regular or all.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: usize,
    pub p: u64,
    pub format: Format,
    pub cache_path: PathBuf,
    pub truncation: Option<u32>,
    pub seed: u64,
}

/// A failed run: the message and the exit code.
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Internal(_) | Error::Unstable { .. } => 1,
            _ => 2,
        };
        Failure(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(1, format!("i/o: {e}"))
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn dispatch(
    cli: Cli,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    check_prime(cli.p)?;
    if cli.n == 0 {
        return Err(Failure(2, "n must be positive".into()));
    }
    let cfg = RunConfig {
        n: cli.n,
        p: cli.p,
        format: cli.format,
        cache_path: cli
            .cache
            .unwrap_or_else(|| PathBuf::from(format!("hecke-cache-n{}-p{}.json", cli.n, cli.p))),
        truncation: cli.truncation,
        seed: cli.seed,
    };
    match cli.command {
        Command::Satake { lambda, oracle } => cmd_satake(&lambda, oracle, &cfg, out),
        Command::Convolve { lambda, mu, oracle } => {
            cmd_convolve(&lambda, &mu, oracle, &cfg, out, err)
        }
        Command::Quotient { chi } => cmd_quotient(&chi, &cfg, out),
        Command::Jacquet { chi } => cmd_jacquet(&chi, &cfg, out),
        Command::Orbit { chi } => cmd_orbit(&chi, &cfg, out),
        Command::Verify { suite } => cmd_verify(&suite, &cfg, out),
    }
}

fn parse_cocharacter(text: &str, cfg: &RunConfig) -> Result<Partition> {
    let lambda = Partition::parse(text)?;
    if lambda.len() != cfg.n {
        return Err(Error::Parse(format!(
            "{text:?} has {} parts, expected n = {}",
            lambda.len(),
            cfg.n
        )));
    }
    Ok(lambda)
}

fn parse_chi(text: &str, cfg: &RunConfig) -> Result<OrbitPoint> {
    let chi = OrbitPoint::parse(text, cfg.p)?;
    if chi.n() != cfg.n {
        return Err(Error::Parse(format!(
            "{text:?} has {} coordinates, expected n = {}",
            chi.n(),
            cfg.n
        )));
    }
    Ok(chi)
}

fn emit(out: &mut dyn Write, cfg: &RunConfig, value: Value, table: String) -> io::Result<()> {
    match cfg.format {
        Format::Json => writeln!(out, "{value}"),
        Format::Table => write!(out, "{table}"),
    }
}

fn verdict(equal: bool) -> &'static str {
    if equal {
        "EQUAL"
    } else {
        "DIFFER"
    }
}

fn cmd_satake(
    lambda: &str,
    oracle: bool,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let lambda = parse_cocharacter(lambda, cfg)?;
    let closed = satake_closed_form(&lambda, cfg.p);
    let mut value = json!({
        "schema": 1,
        "command": "satake",
        "n": cfg.n,
        "p": cfg.p,
        "lambda": lambda,
        "closed_form": closed,
        "rendered": closed.render_factored(),
    });
    let mut table = format!("{}\n", closed.render_factored());
    let mut code = 0;
    if oracle {
        if cfg.n != 2 {
            return Err(Failure(2, "the Satake oracle supports n = 2 only".into()));
        }
        let computed = satake_oracle(&lambda, cfg.p, cfg.truncation)?;
        let equal = computed == closed;
        value["oracle"] = json!(computed);
        value["verdict"] = json!(verdict(equal));
        let _ = writeln!(table, "oracle: {}", computed.render_factored());
        let _ = writeln!(table, "verdict: {}", verdict(equal));
        code = if equal { 0 } else { 1 };
    }
    emit(out, cfg, value, table)?;
    Ok(code)
}

pub const CACHE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub lambda: Vec<i64>,
    pub mu: Vec<i64>,
    /// `"nu_1,..,nu_n" -> c^nu`.
    pub result: BTreeMap<String, u64>,
}

/// Append-only store of convolution structure constants for one `(n, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheFile {
    pub schema: u32,
    pub version: String,
    pub p: u64,
    pub n: usize,
    pub entries: Vec<CacheEntry>,
}

impl CacheFile {
    fn empty(n: usize, p: u64) -> Self {
        Self {
            schema: 1,
            version: CACHE_VERSION.to_string(),
            p,
            n,
            entries: Vec::new(),
        }
    }

    /// Loads the cache; a missing file or an older version starts afresh.
    pub fn load(path: &Path, n: usize, p: u64, err: &mut dyn Write) -> Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Self::empty(n, p)),
            Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
        };
        let raw: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Cache(format!("{} is corrupt: {e}", path.display())))?;
        if raw.get("version").and_then(Value::as_str) != Some(CACHE_VERSION) {
            let _ = writeln!(
                err,
                "cache: version mismatch, regenerating {}",
                path.display()
            );
            return Ok(Self::empty(n, p));
        }
        let cache: Self = serde_json::from_value(raw)
            .map_err(|e| Error::Cache(format!("{} is corrupt: {e}", path.display())))?;
        if cache.schema != 1 {
            return Err(Error::Cache(format!(
                "{} has unknown schema {}",
                path.display(),
                cache.schema
            )));
        }
        if cache.n != n || cache.p != p {
            return Err(Error::Cache(format!(
                "{} holds n = {}, p = {}; refusing to mix with n = {n}, p = {p}",
                path.display(),
                cache.n,
                cache.p
            )));
        }
        Ok(cache)
    }

    pub fn lookup(
        &self,
        lambda: &Partition,
        mu: &Partition,
    ) -> Result<Option<BTreeMap<Partition, u64>>> {
        let Some(entry) = self
            .entries
            .iter()
            .find(|e| e.lambda == lambda.parts() && e.mu == mu.parts())
        else {
            return Ok(None);
        };
        let mut out = BTreeMap::new();
        for (k, &c) in &entry.result {
            let nu = Partition::parse(k)
                .map_err(|_| Error::Cache(format!("corrupt cache key {k:?}")))?;
            if nu.len() != self.n {
                return Err(Error::Cache(format!("corrupt cache key {k:?}")));
            }
            out.insert(nu, c);
        }
        Ok(Some(out))
    }

    pub fn append(
        &mut self,
        lambda: &Partition,
        mu: &Partition,
        result: &BTreeMap<Partition, u64>,
    ) {
        self.entries.push(CacheEntry {
            lambda: lambda.parts().to_vec(),
            mu: mu.parts().to_vec(),
            result: result
                .iter()
                .map(|(nu, &c)| (nu.parts().iter().join(","), c))
                .collect(),
        });
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(&tmp, text + "\n")?;
        fs::rename(&tmp, path)
    }
}

fn cmd_convolve(
    lambda: &str,
    mu: &str,
    oracle: bool,
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let lambda = parse_cocharacter(lambda, cfg)?;
    let mu = parse_cocharacter(mu, cfg)?;
    let product = HeckeElement::basis(&lambda, cfg.p).multiply(&HeckeElement::basis(&mu, cfg.p))?;
    let mut value = json!({
        "schema": 1,
        "command": "convolve",
        "n": cfg.n,
        "p": cfg.p,
        "lambda": lambda,
        "mu": mu,
        "product": product,
        "rendered": product.render(),
    });
    let mut table = format!("{product}\n");
    let mut code = 0;
    if oracle {
        if spread_bound(cfg.n).is_none() {
            return Err(Failure(
                2,
                "the convolution oracle supports n = 2, 3 only".into(),
            ));
        }
        let mut cache = CacheFile::load(&cfg.cache_path, cfg.n, cfg.p, err)?;
        let counts = match cache.lookup(&lambda, &mu)? {
            Some(hit) => {
                let _ = writeln!(err, "cache: hit");
                hit
            }
            None => {
                let _ = writeln!(err, "cache: miss");
                let computed = convolve_oracle(&lambda, &mu, cfg.p)?;
                cache.append(&lambda, &mu, &computed);
                cache.save(&cfg.cache_path)?;
                computed
            }
        };
        let mut geometric = HeckeElement::zero(cfg.n, cfg.p);
        for (nu, c) in counts {
            geometric.add_term(nu, QuadScalar::from_int(c as i64, cfg.p));
        }
        let equal = geometric == product;
        value["oracle"] = json!(geometric);
        value["verdict"] = json!(verdict(equal));
        let _ = writeln!(table, "oracle: {geometric}");
        let _ = writeln!(table, "verdict: {}", verdict(equal));
        code = if equal { 0 } else { 1 };
    }
    emit(out, cfg, value, table)?;
    Ok(code)
}

fn factor_text(factors: &BTreeMap<OrbitPoint, usize>) -> String {
    factors.iter().map(|(x, m)| format!("{x} x{m}")).join(", ")
}

fn cmd_quotient(
    chi: &str,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let chi = parse_chi(chi, cfg)?;
    let q = build_quotient(&chi, cfg.p)?;
    let factors = composition_factors(&q, &orbit(&chi))?;
    let annihilated = annihilator_check(&q, &chi)?;
    let value = json!({
        "schema": 1,
        "command": "quotient",
        "chi": chi,
        "module": q,
        "factors": factor_list(&factors),
        "annihilator": annihilated,
    });
    let mut table = format!(
        "chi {chi}\ndim {}\nbasis {}\n",
        q.dim,
        q.basis_tags.join(", ")
    );
    for (i, m) in q.mult_ops.iter().enumerate() {
        let _ = writeln!(table, "x{} =", i + 1);
        for row in m.rows() {
            let _ = writeln!(table, "  [{}]", row.iter().map(|x| x.to_text()).join(", "));
        }
    }
    let _ = writeln!(table, "factors {}", factor_text(&factors));
    let _ = writeln!(
        table,
        "annihilator {}",
        if annihilated { "ok" } else { "FAILED" }
    );
    emit(out, cfg, value, table)?;
    Ok(if annihilated { 0 } else { 1 })
}

fn cmd_jacquet(
    chi: &str,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let chi = parse_chi(chi, cfg)?;
    let report = jacquet_report(&chi, cfg.p)?;
    let list = |fs: &[crate::quotient::FactorEntry]| {
        fs.iter()
            .map(|f| format!("{} x{}", f.character, f.multiplicity))
            .join(", ")
    };
    let table = format!(
        "chi {} ({})\nW-module factors: {}\nprincipal series factors: {}\nmatch: {}\n",
        report.chi,
        if report.regular {
            "regular"
        } else {
            "not regular"
        },
        list(&report.w_module_factors),
        list(&report.principal_series_factors),
        report.matches,
    );
    let mut value = json!({"schema": 1});
    if let Value::Object(fields) =
        serde_json::to_value(&report).map_err(|e| Failure(1, e.to_string()))?
    {
        value
            .as_object_mut()
            .expect("object literal")
            .extend(fields);
    }
    let failed = report.regular && !report.matches;
    emit(out, cfg, value, table)?;
    Ok(if failed { 1 } else { 0 })
}

fn cmd_orbit(chi: &str, cfg: &RunConfig, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let chi = parse_chi(chi, cfg)?;
    let o = orbit(&chi);
    let regular = is_regular(&o);
    let value = json!({"schema": 1, "points": o.points(), "regular": regular});
    let mut table = String::new();
    for x in o.points() {
        let _ = writeln!(table, "{x}");
    }
    let _ = writeln!(table, "regular: {regular}");
    emit(out, cfg, value, table)?;
    Ok(0)
}

fn cmd_verify(
    suite: &str,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    if !SUITES.contains(&suite) {
        return Err(Failure(
            2,
            format!(
                "unknown suite {suite:?}; expected one of {}",
                SUITES.join(", ")
            ),
        ));
    }
    let report = run_suite(suite, cfg.n, cfg.p, cfg.seed)?;
    let value = serde_json::to_value(&report).map_err(|e| Failure(1, e.to_string()))?;
    emit(out, cfg, value, report.render_table())?;
    Ok(if report.passed { 0 } else { 1 })
}
