use std::path::PathBuf;

use cantor_games::bob::RestrictedParams;
use cantor_games::families::{
    coloring_certificate, dominance_certificate, Certificate, ColoringFamily, ColoringParams, DominanceFamily,
    DominanceParams,
};
use cantor_games::referee::{verify_trace, Trace};
use cantor_games::Dyadic;
use clap::{Args, Subcommand};

use crate::{io_err, out_dir, Failure, Outcome};

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[command(subcommand)]
    family: Family,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 3)]
    attempts: u32,
    /// Build even when the certificate fails.
    #[arg(long, global = true)]
    unchecked: bool,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Family {
    /// Patterns where every ordered pair dominates on an eighth of the blocks.
    Dominance {
        #[arg(long)]
        n: u32,
        /// Family of 2^m patterns (default n).
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        s: Option<usize>,
    },
    /// Words over r colors with balanced pairwise overlaps.
    Coloring {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Both families for the restricted strategy at the given game.
    Restricted {
        #[arg(long, default_value_t = 32)]
        n: u32,
        #[arg(long, default_value_t = 6)]
        p: u32,
        #[arg(long, default_value = "1/128")]
        d: Dyadic,
        #[arg(long, default_value_t = 8)]
        m: u32,
    },
}

fn checked(cert: &Certificate, unchecked: bool) -> Outcome {
    print!("{}", cert.to_text());
    if cert.holds() || unchecked {
        Ok(())
    } else {
        Err(Failure::Config("parameters fail the certificate; pass --unchecked to build anyway".into()))
    }
}

fn write(path: PathBuf, text: &str) -> Outcome {
    std::fs::write(&path, text).map_err(io_err(&path))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build_dominance(p: DominanceParams, a: &ConstructArgs) -> Result<DominanceFamily, Failure> {
    let f = DominanceFamily::build(p, a.seed, a.attempts).map_err(|e| Failure::Check(e.to_string()))?;
    println!("dominance family built in {} attempt(s)", f.attempts);
    Ok(f)
}

fn build_coloring(p: ColoringParams, a: &ConstructArgs) -> Result<ColoringFamily, Failure> {
    let f = ColoringFamily::build(p, a.seed, a.attempts).map_err(|e| Failure::Check(e.to_string()))?;
    println!("coloring family built in {} attempt(s)", f.attempts);
    Ok(f)
}

pub fn construct(a: ConstructArgs) -> Outcome {
    let dir = out_dir(&a.out)?;
    match &a.family {
        Family::Dominance { n, m, s } => {
            let m = m.unwrap_or(*n);
            let p = DominanceParams { n: *n, m, s: s.unwrap_or(64 * m as usize) };
            if m > 16 {
                return Err(Failure::Config("--m above 16 is too large to store".into()));
            }
            let cert = dominance_certificate(&p);
            checked(&cert, a.unchecked)?;
            let f = build_dominance(p.clone(), &a)?;
            let stem = format!("dominance-n{}-m{m}-s{}-seed{}", p.n, p.s, a.seed);
            write(dir.join(format!("{stem}.txt")), &f.to_text())?;
            write(dir.join(format!("{stem}.cert")), &cert.to_text())
        }
        Family::Coloring { n, m, r, ell } => {
            let m = m.unwrap_or(*n);
            if m > 12 || *r > 36 || *r < 2 {
                return Err(Failure::Config("need m <= 12 and 2 <= r <= 36".into()));
            }
            let p = ColoringParams::new(*n, m, *r, *ell);
            let cert = coloring_certificate(&p);
            checked(&cert, a.unchecked)?;
            let f = build_coloring(p, &a)?;
            let stem = format!("coloring-n{n}-m{m}-r{r}-ell{ell}-seed{}", a.seed);
            write(dir.join(format!("{stem}.txt")), &f.to_text())?;
            write(dir.join(format!("{stem}.cert")), &cert.to_text())
        }
        Family::Restricted { n, p, d, m } => {
            if !d.is_neg_power_of_two() {
                return Err(Failure::Config(format!("--d {d} must be a power of two")));
            }
            let params = RestrictedParams::scaled(*n, *p, d.clone(), *m);
            let cert = params.certificate();
            checked(&cert, a.unchecked)?;
            let c = build_coloring(params.coloring.clone(), &a)?;
            let dm = DominanceFamily::build(params.dominance.clone(), a.seed ^ 0x9e37_79b9, a.attempts)
                .map_err(|e| Failure::Check(e.to_string()))?;
            let stem = format!("restricted-n{n}-p{p}-m{m}-seed{}", a.seed);
            write(dir.join(format!("{stem}-coloring.txt")), &c.to_text())?;
            write(dir.join(format!("{stem}-dominance.txt")), &dm.to_text())?;
            write(dir.join(format!("{stem}.cert")), &cert.to_text())
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// A trace written by `play` or a family written by `construct`.
    path: PathBuf,
}

pub fn verify(a: VerifyArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.path).map_err(io_err(&a.path))?;
    let head = text.lines().next().unwrap_or("");
    let bad = |e: cantor_games::ParseError| Failure::Check(format!("malformed file: {e}"));
    if head.starts_with("#cantor-games trace") {
        let trace = Trace::parse(&text).map_err(bad)?;
        let report = verify_trace(&trace);
        println!("records {}", report.records);
        if report.passed() {
            println!("all checks passed");
            return Ok(());
        }
        for f in &report.failures {
            println!("FAIL {f}");
        }
        let at = report.first_failure.map(|i| format!(" at record {i}")).unwrap_or_default();
        Err(Failure::Check(format!("trace verification failed{at}")))
    } else if head.starts_with("#coloring") {
        let f = ColoringFamily::parse(&text).map_err(bad)?;
        print!("{}", coloring_certificate(&f.params).to_text());
        match f.first_condition_violation() {
            None => {
                println!("all {} pairs within the overlap bounds", f.len() * (f.len() - 1) / 2);
                Ok(())
            }
            Some((v, x, w, y, c)) => Err(Failure::Check(format!(
                "strings {v} and {w}: colors {x} and {y} overlap in {c} positions"
            ))),
        }
    } else if head.starts_with("#dominance") {
        let f = DominanceFamily::parse(&text).map_err(bad)?;
        print!("{}", dominance_certificate(&f.params).to_text());
        match f.first_violation() {
            None => {
                println!("all {} ordered pairs dominate on at least s/8 blocks", f.len() * (f.len() - 1));
                Ok(())
            }
            Some((x, y, c)) => Err(Failure::Check(format!("pattern {x} dominates {y} on only {c} blocks"))),
        }
    } else {
        Err(Failure::Check(format!("{}: unrecognized file header `{head}`", a.path.display())))
    }
}
