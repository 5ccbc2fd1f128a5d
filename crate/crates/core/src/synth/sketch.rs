use super::{Lambda, SynthError};
use crate::analysis::AbstractionSpec;
use crate::lang::{parse, Label, ProbExpr, Program, Stmt, VarDecl};
use crate::linalg::{matrix_from_json, matrix_from_matrix_market, SparseMatrix};
use crate::los::{block_semantics, StateSpace};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// One atomic statement of a block library together with its transfer
/// operator on the sketch's state space.
#[derive(Debug, Clone)]
pub struct LibraryBlock {
    pub source: String,
    pub stmt: Stmt,
    pub op: SparseMatrix,
}

/// A sketch without control flow: a fixed number of steps, each of which
/// mixes the library blocks with one row of weights. The instantiated
/// operator is the product of the per-step mixtures.
#[derive(Debug, Clone)]
pub struct FlowFreeSketch {
    pub decls: Vec<VarDecl>,
    pub space: StateSpace,
    pub library: Vec<LibraryBlock>,
    pub steps: usize,
}

impl FlowFreeSketch {
    pub fn new(
        decls: Vec<VarDecl>,
        block_sources: &[String],
        steps: usize,
    ) -> Result<Self, SynthError> {
        let space = StateSpace::new(&decls)?;
        let decl_source: String = decls
            .iter()
            .map(|d| {
                let vals: Vec<String> = d.domain.iter().map(i64::to_string).collect();
                format!("var {}:{{{}}};\n", d.name, vals.join(","))
            })
            .collect();
        let mut library = Vec::with_capacity(block_sources.len());
        for text in block_sources {
            let program = parse(&format!("{decl_source}{text}"))?;
            match program.body {
                Stmt::Skip { .. } | Stmt::Assign { .. } | Stmt::Random { .. } => {}
                _ => {
                    return Err(SynthError::Sketch(format!(
                        "library entry '{text}' is not an atomic block"
                    )))
                }
            }
            let blocks = program.blocks();
            let (_, block) = blocks
                .iter()
                .next()
                .expect("atomic program has a first block");
            let op = block_semantics(&space, block)?.positive;
            library.push(LibraryBlock {
                source: text.clone(),
                stmt: program.body,
                op,
            });
        }
        Ok(FlowFreeSketch {
            decls,
            space,
            library,
            steps,
        })
    }

    pub fn check_shape(&self, lambda: &Lambda) -> Result<(), SynthError> {
        if lambda.len() != self.steps {
            return Err(SynthError::Shape(format!(
                "{} rows for {} steps",
                lambda.len(),
                self.steps
            )));
        }
        for (i, row) in lambda.iter().enumerate() {
            if row.len() != self.library.len() {
                return Err(SynthError::Shape(format!(
                    "row {} has {} weights for {} blocks",
                    i,
                    row.len(),
                    self.library.len()
                )));
            }
        }
        Ok(())
    }

    /// T(λ) = T_1 · T_2 · ... · T_k with T_i = Σ_j λ_ij F_j.
    pub fn instantiate(&self, lambda: &Lambda) -> Result<SparseMatrix, SynthError> {
        self.check_shape(lambda)?;
        let mut product: Option<SparseMatrix> = None;
        for row in lambda {
            let step = SparseMatrix::sum(
                row.iter()
                    .zip(&self.library)
                    .map(|(&w, block)| block.op.scale(w)),
            )?;
            product = Some(match product {
                None => step,
                Some(acc) => acc.matmul(&step)?,
            });
        }
        product.ok_or_else(|| SynthError::Shape("sketch with zero steps".into()))
    }

    /// The row selecting exactly the given (0-based) blocks, one per step.
    pub fn vertex(&self, blocks: &[usize]) -> Lambda {
        blocks
            .iter()
            .map(|&b| {
                let mut row = vec![0.0; self.library.len()];
                row[b] = 1.0;
                row
            })
            .collect()
    }
}

/// A program whose choice sites carry named parameters; the λ rows (one per
/// parametric site, in textual order) are bound onto those names.
#[derive(Debug, Clone)]
pub struct ProgramSketch {
    pub program: Program,
    pub sites: Vec<ChoiceSite>,
}

#[derive(Debug, Clone)]
pub struct ChoiceSite {
    pub label: Label,
    /// One entry per branch: the parameter bound by that branch's weight, if
    /// any. Complement and literal branches bind nothing.
    pub bindings: Vec<Option<String>>,
}

impl ProgramSketch {
    pub fn new(program: Program) -> Result<Self, SynthError> {
        let mut sites = Vec::new();
        program.body.visit(&mut |s| {
            if let Stmt::Choose { label, branches } = s {
                let parametric = branches.iter().any(|(p, _)| !matches!(p, ProbExpr::Lit(_)));
                if parametric {
                    sites.push(ChoiceSite {
                        label: *label,
                        bindings: branches
                            .iter()
                            .map(|(p, _)| match p {
                                ProbExpr::Param(name) => Some(name.clone()),
                                _ => None,
                            })
                            .collect(),
                    });
                }
            }
        });
        if sites.is_empty() {
            return Err(SynthError::Sketch(
                "program has no parametric choice sites".into(),
            ));
        }
        Ok(ProgramSketch { program, sites })
    }

    /// Initial λ: each parametric site's branches weighted uniformly.
    pub fn uniform_lambda(&self) -> Lambda {
        self.sites
            .iter()
            .map(|site| vec![1.0 / site.bindings.len() as f64; site.bindings.len()])
            .collect()
    }

    /// Parameter values read off a λ matrix: branch j of site i binds its
    /// parameter (if any) to λ_ij.
    pub fn bindings_from(&self, lambda: &Lambda) -> Result<BTreeMap<String, f64>, SynthError> {
        if lambda.len() != self.sites.len() {
            return Err(SynthError::Shape(format!(
                "{} rows for {} parametric sites",
                lambda.len(),
                self.sites.len()
            )));
        }
        let mut values: BTreeMap<String, f64> = BTreeMap::new();
        for (site, row) in self.sites.iter().zip(lambda) {
            if row.len() != site.bindings.len() {
                return Err(SynthError::Shape(format!(
                    "site @{} has {} branches, row has {} weights",
                    site.label,
                    site.bindings.len(),
                    row.len()
                )));
            }
            for (binding, &w) in site.bindings.iter().zip(row) {
                if let Some(name) = binding {
                    if let Some(&prev) = values.get(name.as_str()) {
                        if (prev - w).abs() > 1e-12 {
                            return Err(SynthError::ConflictingBinding {
                                name: name.clone(),
                                a: prev,
                                b: w,
                            });
                        }
                    }
                    values.insert(name.clone(), w);
                }
            }
        }
        Ok(values)
    }

    /// Substitutes a λ matrix, without normalization checks (objective
    /// evaluation probes off-simplex points).
    pub fn bind_unchecked(&self, lambda: &Lambda) -> Result<Program, SynthError> {
        let values = self.bindings_from(lambda)?;
        Ok(self.program.bind_params_unchecked(&values)?)
    }
}

/// Flow-free sketch file: variable declarations, a block library in concrete
/// syntax, a step count, and the synthesis target with its abstraction and
/// optional read/write penalty diagonals.
#[derive(Debug, Deserialize)]
struct SketchFile {
    vars: Vec<VarDeclJson>,
    steps: usize,
    library: Vec<String>,
    target: String,
    abstraction: AbstractionSpec,
    #[serde(default)]
    read_penalty: Option<Vec<f64>>,
    #[serde(default)]
    write_penalty: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct VarDeclJson {
    name: String,
    domain: Vec<i64>,
}

/// A parsed sketch file: the sketch plus everything needed to build its
/// objective.
#[derive(Debug)]
pub struct LoadedSketch {
    pub sketch: FlowFreeSketch,
    pub target: SparseMatrix,
    pub abstraction_spec: AbstractionSpec,
    pub read_penalty: Vec<f64>,
    pub write_penalty: Vec<f64>,
}

pub fn load_flow_free_sketch(path: &Path) -> Result<LoadedSketch, SynthError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SynthError::Sketch(format!("{}: {e}", path.display())))?;
    let file: SketchFile =
        serde_json::from_str(&text).map_err(|e| SynthError::Sketch(e.to_string()))?;
    let decls: Vec<VarDecl> = file
        .vars
        .into_iter()
        .map(|v| VarDecl {
            name: v.name,
            domain: v.domain,
        })
        .collect();
    let sketch = FlowFreeSketch::new(decls, &file.library, file.steps)?;
    let blocks = sketch.library.len();

    let target_path = path
        .parent()
        .map(|d| d.join(&file.target))
        .unwrap_or_else(|| file.target.clone().into());
    let target_text = std::fs::read_to_string(&target_path)
        .map_err(|e| SynthError::Sketch(format!("{}: {e}", target_path.display())))?;
    let target = if target_path.extension().is_some_and(|e| e == "mm") {
        matrix_from_matrix_market(&target_text)?
    } else {
        matrix_from_json(&target_text)?
    };

    let read_penalty = file.read_penalty.unwrap_or_else(|| vec![0.0; blocks]);
    let write_penalty = file.write_penalty.unwrap_or_else(|| vec![0.0; blocks]);
    for (name, diag) in [
        ("read_penalty", &read_penalty),
        ("write_penalty", &write_penalty),
    ] {
        if diag.len() != blocks {
            return Err(SynthError::Sketch(format!(
                "{name} has {} entries for {blocks} blocks",
                diag.len()
            )));
        }
    }
    Ok(LoadedSketch {
        sketch,
        target,
        abstraction_spec: file.abstraction,
        read_penalty,
        write_penalty,
    })
}
