//! Command-line front end: group parsing, spectrum computation and export,
//! object computations, and the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 resource
//! guard exceeded.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ttperm::group::{parse_group_spec, weyl_group, Group, GroupError, Subgroup};
use ttperm::homotopy::{
    adjoint_tower, is_contractible, koszul, map_complex, strip, zul, Complex, ComplexFunctor,
    HomotopyError,
};
use ttperm::spectrum::{
    cyclic_spectrum, emit_dot, emit_json, enumerate_strata, koszul_support, named_spectrum,
    object_support_profile, SupportClass,
};
use ttperm::suites::{resolve_subgroup, run_suite, seeded_strippable, CheckResult, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "ttperm",
    version,
    about = "Exact computations with permutation modules: modular fixed points, Koszul objects and the set-level spectrum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    /// Group spec: cyclic:n, elab:p^r, klein4, q8, dihedral:2n, sym:n,
    /// perm:[(1,2),(3,4,5)], with ' x ' products.
    #[arg(long)]
    group: String,
    /// Prime characteristic.
    #[arg(long = "char")]
    characteristic: u32,
    /// Guard: maximal group order to enumerate.
    #[arg(long, default_value_t = 512)]
    max_order: usize,
    /// Guard: maximal total dimension for built complexes.
    #[arg(long, default_value_t = 8192)]
    max_dim: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stratified spectrum description of a group.
    Spectrum {
        #[command(flatten)]
        common: CommonOpts,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Request the exact finite point inventory (cyclic p-groups,
        /// klein4 and q8 only).
        #[arg(long)]
        exact: bool,
    },
    /// Run a verification suite and report each check.
    Verify {
        /// Suite: hom-dims, koszul, brauer, nilpotence, conservativity,
        /// functors, tower, spectrum-examples, or all.
        #[arg(long)]
        suite: String,
        /// Restrict to one group spec.
        #[arg(long)]
        group: Option<String>,
        /// Restrict to one characteristic.
        #[arg(long = "char")]
        characteristic: Option<u32>,
        /// Random seed recorded in the report.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker pool size (0 = default).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Guard: maximal group order to enumerate.
        #[arg(long, default_value_t = 512)]
        max_order: usize,
        /// Report format.
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Compute a single object and print its profile.
    Object {
        #[command(subcommand)]
        what: ObjectCommand,
    },
}

#[derive(Subcommand)]
enum ObjectCommand {
    /// Koszul object of a subgroup: graded dimensions and acyclicity.
    Koszul {
        #[command(flatten)]
        common: CommonOpts,
        /// Subgroup: class index, trivial, full, center or C<n>.
        #[arg(long)]
        subgroup: String,
    },
    /// Induced tensor of Koszul objects over the normalizer (its support
    /// is the image of the fixed-points map).
    Zul {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        subgroup: String,
    },
    /// Fixed points of a Koszul object: graded dimensions and acyclicity.
    Psi {
        #[command(flatten)]
        common: CommonOpts,
        /// The p-subgroup taken as fixed points.
        #[arg(long)]
        subgroup: String,
        /// The subgroup whose Koszul object is transformed.
        #[arg(long)]
        koszul: String,
    },
    /// Strip full-isotypic summands from a seeded fixed-point-contractible
    /// complex and verify the equivalence witnesses.
    Strip {
        #[command(flatten)]
        common: CommonOpts,
        /// Subgroup to strip (must make the fixed points contractible).
        #[arg(long, default_value = "full")]
        subgroup: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Finite stages of the adjoint tower of a normal p-subgroup.
    Tower {
        #[command(flatten)]
        common: CommonOpts,
        /// The normal p-subgroup.
        #[arg(long)]
        normal: String,
        #[arg(long, default_value_t = 2)]
        stages: usize,
    },
    /// Stratum support of a Koszul object.
    Support {
        #[command(flatten)]
        common: CommonOpts,
        /// Subgroup whose Koszul object is classified.
        #[arg(long)]
        koszul: String,
    },
}

const EXIT_VERIFY_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;

enum CliError {
    Input(String),
    Guard(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Guard(_) => EXIT_GUARD,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Guard(m) => m,
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::OrderGuard { .. } => CliError::Guard(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<HomotopyError> for CliError {
    fn from(e: HomotopyError) -> Self {
        match e {
            HomotopyError::GuardExceeded(_) => CliError::Guard(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum {
            common,
            format,
            exact,
        } => cmd_spectrum(common, format, exact),
        Command::Verify {
            suite,
            group,
            characteristic,
            seed,
            jobs,
            max_order,
            report,
        } => {
            return cmd_verify(suite, group, characteristic, seed, jobs, max_order, report);
        }
        Command::Object { what } => cmd_object(what),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load_group(common: &CommonOpts) -> Result<Arc<Group>, CliError> {
    if !ttperm::linalg::is_prime(common.characteristic) {
        return Err(CliError::Input(format!(
            "characteristic {} is not prime",
            common.characteristic
        )));
    }
    Ok(parse_group_spec(&common.group, common.max_order)?)
}

fn prime_power_exponent(order: usize, p: u32) -> Option<usize> {
    let mut n = order;
    let mut e = 0usize;
    while n % p as usize == 0 {
        n /= p as usize;
        e += 1;
    }
    if n == 1 {
        Some(e)
    } else {
        None
    }
}

fn cmd_spectrum(common: CommonOpts, format: Format, exact: bool) -> Result<(), CliError> {
    let g = load_group(&common)?;
    let p = common.characteristic;
    let description = if exact {
        exact_description(&g, p).ok_or_else(|| {
            CliError::Input(format!(
                "exact inventory is unavailable for {} at p={} (cyclic p-groups, klein4 and q8 only)",
                common.group, p
            ))
        })?
    } else {
        enumerate_strata(&g, &common.group, p).map_err(|e| CliError::Input(e.to_string()))?
    };
    match format {
        Format::Json => println!("{}", emit_json(&description)),
        Format::Dot => print!("{}", emit_dot(&description)),
    }
    Ok(())
}

/// Exact descriptions: cyclic p-groups reproduce the finite poset, plus the
/// two completely solved named groups.
fn exact_description(g: &Arc<Group>, p: u32) -> Option<ttperm::spectrum::SpectrumDescription> {
    let exponent = prime_power_exponent(g.order(), p)?;
    let cyclic = (0..g.order()).any(|i| g.element_order(i) == g.order());
    if cyclic {
        return Some(cyclic_spectrum(p, exponent));
    }
    if p == 2 && g.order() == 4 {
        return named_spectrum("klein4", 2).ok();
    }
    if p == 2 && g.order() == 8 {
        let involutions = (1..g.order()).filter(|&i| g.element_order(i) == 2).count();
        if involutions == 1 {
            return named_spectrum("q8", 2).ok();
        }
    }
    None
}

#[derive(Serialize)]
struct JsonReport<'a> {
    suite: &'a str,
    seed: u64,
    group: Option<&'a str>,
    #[serde(rename = "char")]
    characteristic: Option<u32>,
    checks: Vec<JsonCheck>,
    total: usize,
    passed: usize,
    failed: usize,
}

#[derive(Serialize)]
struct JsonCheck {
    id: String,
    instance: String,
    pass: bool,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    repro: Option<String>,
}

fn cmd_verify(
    suite: String,
    group: Option<String>,
    characteristic: Option<u32>,
    seed: u64,
    jobs: usize,
    max_order: usize,
    report: ReportFormat,
) -> ExitCode {
    let cfg = SuiteConfig {
        group: group.clone(),
        p: characteristic,
        seed,
        jobs,
        max_order,
    };
    let results: Vec<CheckResult> = match run_suite(&suite, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            let code = if e.contains("guard") || e.contains("exceeds") {
                EXIT_GUARD
            } else {
                EXIT_INPUT
            };
            return ExitCode::from(code);
        }
    };
    let passed = results.iter().filter(|c| c.pass).count();
    let failed = results.len() - passed;
    match report {
        ReportFormat::Text => {
            println!("suite: {}  seed: {}", suite, seed);
            if let Some(g) = &group {
                println!("group: {}", g);
            }
            for c in &results {
                let status = if c.pass { "pass" } else { "FAIL" };
                println!("{} — {} — {} ({})", c.id, status, c.instance, c.detail);
                if let Some(repro) = &c.repro {
                    println!("    reproduce: {}", repro);
                }
            }
            println!(
                "summary: {} checks, {} passed, {} failed",
                results.len(),
                passed,
                failed
            );
        }
        ReportFormat::Json => {
            let doc = JsonReport {
                suite: &suite,
                seed,
                group: group.as_deref(),
                characteristic,
                checks: results
                    .iter()
                    .map(|c| JsonCheck {
                        id: c.id.clone(),
                        instance: c.instance.clone(),
                        pass: c.pass,
                        detail: c.detail.clone(),
                        repro: c.repro.clone(),
                    })
                    .collect(),
                total: results.len(),
                passed,
                failed,
            };
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
    }
    if failed > 0 {
        ExitCode::from(EXIT_VERIFY_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}

fn resolve(g: &Arc<Group>, p: u32, name: &str) -> Result<Subgroup, CliError> {
    resolve_subgroup(g, p, name).map_err(CliError::Input)
}

fn print_complex_profile(name: &str, x: &Complex) {
    let dims: Vec<String> = x
        .graded_dims()
        .iter()
        .map(|(d, n)| format!("{}:{}", d, n))
        .collect();
    println!("{}", name);
    println!("  graded dimensions: [{}]", dims.join(" "));
    println!("  total dimension: {}", x.total_dim());
    println!("  acyclic: {}", x.is_acyclic());
}

fn koszul_guard(max_dim: usize) -> usize {
    // the Koszul object of index r has total dimension 2^r
    (usize::BITS - 1 - max_dim.leading_zeros()) as usize
}

fn cmd_object(what: ObjectCommand) -> Result<(), CliError> {
    match what {
        ObjectCommand::Koszul { common, subgroup } => {
            let g = load_group(&common)?;
            let p = common.characteristic;
            let h = resolve(&g, p, &subgroup)?;
            let kos = koszul(&g, &h, p, koszul_guard(common.max_dim))?;
            print_complex_profile(
                &format!("koszul object of a subgroup of order {}", h.order()),
                &kos,
            );
            println!("  contractible: {}", is_contractible(&kos));
            Ok(())
        }
        ObjectCommand::Zul { common, subgroup } => {
            let g = load_group(&common)?;
            let p = common.characteristic;
            let h = resolve(&g, p, &subgroup)?;
            let t = zul(&g, &h, p, common.max_dim)?;
            print_complex_profile(
                &format!("induced Koszul tensor of a subgroup of order {}", h.order()),
                &t,
            );
            Ok(())
        }
        ObjectCommand::Psi {
            common,
            subgroup,
            koszul: koszul_name,
        } => {
            let g = load_group(&common)?;
            let p = common.characteristic;
            let h = resolve(&g, p, &subgroup)?;
            if !h.is_p_subgroup(p) {
                return Err(CliError::Input("H is not a p-subgroup".into()));
            }
            let k = resolve(&g, p, &koszul_name)?;
            let kos = koszul(&g, &k, p, koszul_guard(common.max_dim))?;
            let wd = weyl_group(&g, &h);
            let pk = map_complex(&ComplexFunctor::Psi(&h, &wd), &kos)?;
            print_complex_profile(
                &format!(
                    "fixed points (H order {}) of the Koszul object of K (order {})",
                    h.order(),
                    k.order()
                ),
                &pk,
            );
            Ok(())
        }
        ObjectCommand::Strip {
            common,
            subgroup,
            seed,
        } => {
            let g = load_group(&common)?;
            let p = common.characteristic;
            let h = resolve(&g, p, &subgroup)?;
            let wd = weyl_group(&g, &h);
            let x = seeded_strippable(&g, p, seed);
            print_complex_profile(&format!("seeded input (seed {})", seed), &x);
            let res = strip(&x, &h, &wd)?;
            print_complex_profile("stripped output", &res.reduced);
            println!("  eliminated pairs: {}", res.eliminated_pairs);
            let fg = res.to_reduced.compose(&res.from_reduced);
            let fg_ok = fg
                .comps
                .iter()
                .all(|(&d, m)| *m == ttperm::linalg::FpMatrix::identity(p, res.reduced.dim_at(d)));
            println!("  witnesses: f∘g = id: {}", fg_ok);
            Ok(())
        }
        ObjectCommand::Tower {
            common,
            normal,
            stages,
        } => {
            let g = load_group(&common)?;
            let p = common.characteristic;
            let n = resolve(&g, p, &normal)?;
            if stages > 4 {
                return Err(CliError::Guard("tower stages guard is 4".into()));
            }
            let wd = weyl_group(&g, &n);
            let tower = adjoint_tower(&g, &n, &wd, p, stages, common.max_dim)?;
            println!(
                "adjoint tower over a normal subgroup of order {} ({} stages)",
                n.order(),
                tower.len() - 1
            );
            for (k, stage) in tower.iter().enumerate() {
                let dims: Vec<String> = stage
                    .x
                    .graded_dims()
                    .iter()
                    .map(|(d, n)| format!("{}:{}", d, n))
                    .collect();
                println!("stage {}: x dims [{}]", k, dims.join(" "));
                if let Some(s) = &stage.s_next_dims {
                    let parts: Vec<String> = s
                        .iter()
                        .map(|(name, mult)| format!("{}^{}", name, mult))
                        .collect();
                    println!(
                        "  next summand: {}",
                        if parts.is_empty() {
                            "0".to_string()
                        } else {
                            parts.join(" + ")
                        }
                    );
                }
                let bij = stage.alpha_checks.iter().filter(|c| c.bijective).count();
                println!(
                    "  comparison maps: {}/{} bijective",
                    bij,
                    stage.alpha_checks.len()
                );
            }
            Ok(())
        }
        ObjectCommand::Support {
            common,
            koszul: koszul_name,
        } => {
            let g = load_group(&common)?;
            let p = common.characteristic;
            let k = resolve(&g, p, &koszul_name)?;
            let support = koszul_support(&g, &k, p);
            let classes = ttperm::homotopy::p_classes_with_weyl(&g, p);
            println!(
                "support of the Koszul object of a subgroup of order {}:",
                k.order()
            );
            for i in &support {
                println!("  stratum {} (class order {})", i, classes[*i].0.order());
            }
            if support.is_empty() {
                println!("  (empty)");
            }
            let kos = koszul(&g, &k, p, koszul_guard(common.max_dim))?;
            let profile = object_support_profile(&kos, &classes)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let by_profile: Vec<usize> = profile
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != SupportClass::Out)
                .map(|(i, _)| i)
                .collect();
            println!("  object profile agrees: {}", by_profile == support);
            Ok(())
        }
    }
}
