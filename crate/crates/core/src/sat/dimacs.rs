use super::cnf::CnfInstance;
use super::Lit;

/// A DIMACS file with optional `c g <group> <clause-index>` annotations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DimacsFile {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
    /// `(group, clause-index)` pairs.
    pub groups: Vec<(usize, usize)>,
}

pub fn write_dimacs(cnf: &CnfInstance) -> String {
    let mut out = String::new();
    for (i, g) in cnf.groups.iter().enumerate() {
        out.push_str(&format!("c group {i} {g}\n"));
    }
    for (a, v) in &cnf.atoms {
        out.push_str(&format!("c var {} p{}@{}\n", v.0 + 1, a.prop.0, a.step));
    }
    out.push_str(&format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len()));
    for (i, g) in cnf.clause_group.iter().enumerate() {
        out.push_str(&format!("c g {g} {i}\n"));
    }
    for c in &cnf.clauses {
        for l in c {
            out.push_str(&l.to_dimacs().to_string());
            out.push(' ');
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<DimacsFile, String> {
    let mut f = DimacsFile::default();
    let mut current = Vec::new();
    let mut declared = None;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if let ["g", g, i] = words.as_slice() {
                let g = g.parse().map_err(|_| format!("line {}: bad group", n + 1))?;
                let i = i.parse().map_err(|_| format!("line {}: bad clause index", n + 1))?;
                f.groups.push((g, i));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let nums: Vec<usize> = rest
                .split_whitespace()
                .map(|w| w.parse().map_err(|_| format!("line {}: bad header", n + 1)))
                .collect::<Result<_, _>>()?;
            if nums.len() != 2 {
                return Err(format!("line {}: bad header", n + 1));
            }
            f.num_vars = nums[0];
            declared = Some(nums[1]);
            continue;
        }
        for w in line.split_whitespace() {
            let x: i64 = w.parse().map_err(|_| format!("line {}: bad literal `{w}`", n + 1))?;
            if x == 0 {
                f.clauses.push(std::mem::take(&mut current));
            } else {
                if x.unsigned_abs() as usize > f.num_vars {
                    return Err(format!("line {}: variable {x} out of range", n + 1));
                }
                current.push(Lit::from_dimacs(x));
            }
        }
    }
    if !current.is_empty() {
        f.clauses.push(current);
    }
    match declared {
        None => Err("missing `p cnf` header".to_string()),
        Some(m) if m != f.clauses.len() => Err(format!("header declares {m} clauses, found {}", f.clauses.len())),
        Some(_) => Ok(f),
    }
}
