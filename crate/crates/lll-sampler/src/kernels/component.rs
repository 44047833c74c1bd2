use crate::csp::{falsifiable_under, AtomicCsp, PartialAssignment, ProjectedConstraint};
use crate::error::{Error, Result};
use crate::marking::Marking;

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentResult {
    /// Variables reached from the focal variable, ascending.
    pub vars: Vec<usize>,
    /// Falsifiable constraints reached, projected onto `⋆` variables and
    /// sorted by source index.
    pub constraints: Vec<ProjectedConstraint>,
    /// `false` iff a reached constraint touches a marked `⋆` variable other
    /// than the focal one.
    pub token: bool,
}

/// Reusable visitation marks for repeated component searches.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    var_seen: Vec<u32>,
    cons_seen: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    pub fn for_csp(csp: &AtomicCsp) -> Self {
        Self { var_seen: vec![0; csp.num_vars()], cons_seen: vec![0; csp.num_constraints()], epoch: 0 }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.var_seen.fill(0);
            self.cons_seen.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }
}

pub fn component(
    csp: &AtomicCsp,
    marking: &Marking,
    sigma: &PartialAssignment,
    u: usize,
) -> Result<ComponentResult> {
    component_with(&mut Scratch::for_csp(csp), csp, marking, sigma, u)
}

pub fn component_with(
    scratch: &mut Scratch,
    csp: &AtomicCsp,
    marking: &Marking,
    sigma: &PartialAssignment,
    u: usize,
) -> Result<ComponentResult> {
    if !sigma.is_star(u) {
        return Err(Error::Contract(format!("component: focal variable {u} is not ⋆")));
    }
    let epoch = scratch.next_epoch();
    let mut vars = vec![u];
    scratch.var_seen[u] = epoch;
    let mut constraints = Vec::new();
    let mut token = true;
    let mut head = 0;
    'bfs: while head < vars.len() {
        let w = vars[head];
        head += 1;
        for &ci in csp.constraints_of(w) {
            if scratch.cons_seen[ci] == epoch {
                continue;
            }
            scratch.cons_seen[ci] = epoch;
            let c = csp.constraint(ci);
            if !falsifiable_under(c, sigma) {
                continue;
            }
            for &x in &c.vbl {
                let marked = marking.is_marked(x);
                if sigma.is_star(x) {
                    if marked && x != u {
                        token = false;
                    }
                } else if !marked {
                    return Err(Error::Contract(format!(
                        "component: unmarked variable {x} is not ⋆"
                    )));
                }
            }
            if !token {
                break 'bfs;
            }
            let pc = ProjectedConstraint::of(csp, ci, sigma);
            for &x in &pc.vbl {
                if scratch.var_seen[x] != epoch {
                    scratch.var_seen[x] = epoch;
                    vars.push(x);
                }
            }
            constraints.push(pc);
        }
    }
    vars.sort_unstable();
    constraints.sort_unstable_by_key(|c| c.source);
    Ok(ComponentResult { vars, constraints, token })
}
