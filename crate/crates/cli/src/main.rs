use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use mlcfem_cli::{
    parse_way, run_direct, run_multilevel, run_two_grid, CliError, RunConfig, RunOutput,
};
use mlcfem_core::mesh::{load_mesh, refine_regular, save_mesh, unit_square_mesh};

#[derive(Parser)]
#[command(
    name = "mlcfem",
    version,
    about = "Finite element eigenvalue solver on the unit square with a multi-level correction scheme"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Direct eigensolves on a sweep of meshes m, 2m, 4m, ...
    Direct(RunArgs),
    /// Coarse eigensolve plus one fine source solve on the h = H² mesh.
    TwoGrid(RunArgs),
    /// Multi-level correction scheme (multigrid or multispace ladder).
    Mlc(RunArgs),
    /// Mesh generation and refinement utilities.
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value configuration file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// ladder type: multigrid or multispace
    #[arg(long)]
    way: Option<String>,
    /// subdivisions per side of the coarsest mesh
    #[arg(long)]
    m: Option<usize>,
    /// number of levels (mlc) or sweep length (direct)
    #[arg(long)]
    levels: Option<usize>,
    /// 1-based eigenvalue index
    #[arg(long)]
    index: Option<usize>,
    /// polynomial order 1, 2 or 3
    #[arg(long)]
    order: Option<usize>,
    /// relative eigensolver tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// CSV output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// diffusion coefficient: positive constant or "wavy"
    #[arg(long)]
    coeff_a: Option<String>,
    /// density coefficient: positive constant or "wavy"
    #[arg(long)]
    rho: Option<String>,
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Write a uniform unit-square triangulation as <stem>.node / <stem>.ele.
    Gen {
        /// subdivisions per side
        #[arg(long)]
        m: usize,
        /// output path stem
        #[arg(long)]
        out: PathBuf,
    },
    /// Read <stem>.node / <stem>.ele, refine each triangle into four, write.
    Refine {
        /// input path stem
        input: PathBuf,
        /// output path stem
        #[arg(long)]
        out: PathBuf,
    },
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(w) = &self.way {
            cfg.way = parse_way(w)?;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(l) = self.levels {
            cfg.levels = l;
        }
        if let Some(i) = self.index {
            cfg.index = i;
        }
        if let Some(o) = self.order {
            cfg.order = o;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(out) = self.out {
            cfg.out = Some(out);
        }
        if let Some(c) = &self.coeff_a {
            cfg.coeff_a = mlcfem_cli::Coeff::parse(c)?;
        }
        if let Some(r) = &self.rho {
            cfg.rho = mlcfem_cli::Coeff::parse(r)?;
        }
        Ok(cfg)
    }
}

fn print_run(title: &str, cfg: &RunConfig, out: &RunOutput) {
    print!(
        "{}",
        mlcfem_cli::summary_table(title, &out.reference_label, &out.rows)
    );
    if let Some(path) = &cfg.out {
        println!("csv written to {}", path.display());
    }
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Direct(args) => {
            let cfg = args.into_config()?;
            let out = run_direct(&cfg)?;
            print_run("direct eigensolve sweep", &cfg, &out);
        }
        Cmd::TwoGrid(args) => {
            let cfg = args.into_config()?;
            let out = run_two_grid(&cfg)?;
            print_run("two-grid", &cfg, &out);
        }
        Cmd::Mlc(args) => {
            let cfg = args.into_config()?;
            let out = run_multilevel(&cfg)?;
            print_run("multi-level correction", &cfg, &out);
        }
        Cmd::Mesh { cmd } => match cmd {
            MeshCmd::Gen { m, out } => {
                let mesh = unit_square_mesh(m)?;
                save_mesh(&mesh, &out)?;
                println!(
                    "wrote {} vertices, {} triangles to {}.node / {}.ele",
                    mesh.n_vertices(),
                    mesh.n_triangles(),
                    out.display(),
                    out.display()
                );
            }
            MeshCmd::Refine { input, out } => {
                let mesh = load_mesh(&input)?;
                let fine = refine_regular(&mesh);
                save_mesh(&fine, &out)?;
                println!(
                    "refined {} -> {} triangles, wrote {}.node / {}.ele",
                    mesh.n_triangles(),
                    fine.n_triangles(),
                    out.display(),
                    out.display()
                );
            }
        },
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.cmd) {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
}
