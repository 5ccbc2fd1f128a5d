use super::CompileError;
use crate::lang::VarDecl;

/// The enumerated joint state space of a program's variables. States are
/// numbered lexicographically in declaration order, with each variable
/// ranging over its domain in the declared order; the first joint valuation
/// gets index 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    vars: Vec<VarDecl>,
    strides: Vec<usize>,
    size: usize,
}

impl StateSpace {
    pub fn new(decls: &[VarDecl]) -> Result<Self, CompileError> {
        if decls.is_empty() {
            return Err(CompileError::NoVariables);
        }
        for d in decls {
            if d.domain.is_empty() {
                return Err(CompileError::EmptyDomain(d.name.clone()));
            }
        }
        let mut strides = vec![0usize; decls.len()];
        let mut size = 1usize;
        for (i, d) in decls.iter().enumerate().rev() {
            strides[i] = size;
            size *= d.domain.len();
        }
        Ok(StateSpace {
            vars: decls.to_vec(),
            strides,
            size,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn vars(&self) -> &[VarDecl] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|d| d.name == name)
    }

    pub fn domain(&self, var: usize) -> &[i64] {
        &self.vars[var].domain
    }

    fn value_pos(&self, var: usize, value: i64) -> Result<usize, CompileError> {
        self.vars[var]
            .domain
            .iter()
            .position(|&v| v == value)
            .ok_or_else(|| CompileError::ValueOutsideDomain {
                var: self.vars[var].name.clone(),
                value,
            })
    }

    /// 0-based position of a joint valuation (one value per declared
    /// variable, in declaration order).
    pub fn offset(&self, values: &[i64]) -> Result<usize, CompileError> {
        assert_eq!(values.len(), self.vars.len(), "one value per variable");
        let mut off = 0;
        for (i, &v) in values.iter().enumerate() {
            off += self.value_pos(i, v)? * self.strides[i];
        }
        Ok(off)
    }

    /// The enumeration index of a joint valuation, 1-based.
    pub fn xi(&self, values: &[i64]) -> Result<usize, CompileError> {
        Ok(self.offset(values)? + 1)
    }

    /// Inverse of [`StateSpace::offset`].
    pub fn decode(&self, offset: usize) -> Vec<i64> {
        debug_assert!(offset < self.size);
        let mut out = Vec::with_capacity(self.vars.len());
        for (i, d) in self.vars.iter().enumerate() {
            out.push(d.domain[(offset / self.strides[i]) % d.domain.len()]);
        }
        out
    }

    /// Human-readable form of the valuation at `offset`, e.g. `d=0,g=1,o=2`.
    pub fn describe(&self, offset: usize) -> String {
        self.decode(offset)
            .iter()
            .zip(&self.vars)
            .map(|(v, d)| format!("{}={}", d.name, v))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Iterates all joint valuations in enumeration order.
    pub fn valuations(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.size).map(|off| self.decode(off))
    }
}
