// SPDX-License-Identifier: Apache-2.0

//! Data constraints and their finite-domain evaluation.
//!
//! A constraint is a conjunction of atoms. Satisfiability is decided by
//! merging names linked by equality into classes and intersecting each
//! class's domain with every membership restriction. Over a finite alphabet
//! this is exact, and the satisfying assignments are the product of the class
//! domains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::Name;
use crate::circuit::DataItem;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintAtom {
    /// `d(n) = d(m)`
    Same(Name, Name),
    /// `d(n) = v`
    Is(Name, DataItem),
    /// `d(n) ∈ S`
    In(Name, BTreeSet<DataItem>),
}

impl ConstraintAtom {
    fn names(&self) -> impl Iterator<Item = &Name> {
        let (a, b) = match self {
            ConstraintAtom::Same(a, b) => (a, Some(b)),
            ConstraintAtom::Is(a, _) | ConstraintAtom::In(a, _) => (a, None),
        };
        std::iter::once(a).chain(b)
    }
}

impl fmt::Display for ConstraintAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintAtom::Same(a, b) => write!(f, "d({a})=d({b})"),
            ConstraintAtom::Is(a, v) => write!(f, "d({a})={v}"),
            ConstraintAtom::In(a, s) => {
                let items: Vec<&str> = s.iter().map(DataItem::as_str).collect();
                write!(f, "d({a}) in {{{}}}", items.join(","))
            }
        }
    }
}

/// Conjunction of [`ConstraintAtom`]s; the empty conjunction is `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataConstraint {
    atoms: Vec<ConstraintAtom>,
}

impl DataConstraint {
    pub fn truth() -> Self {
        DataConstraint::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = ConstraintAtom>) -> Self {
        let mut atoms: Vec<_> = atoms.into_iter().collect();
        atoms.sort();
        atoms.dedup();
        DataConstraint { atoms }
    }

    pub fn same(a: &Name, b: &Name) -> Self {
        Self::from_atoms([ConstraintAtom::Same(a.clone(), b.clone())])
    }

    pub fn atoms(&self) -> &[ConstraintAtom] {
        &self.atoms
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn and(&self, other: &DataConstraint) -> DataConstraint {
        Self::from_atoms(self.atoms.iter().chain(&other.atoms).cloned())
    }

    pub fn names(&self) -> BTreeSet<&Name> {
        self.atoms.iter().flat_map(ConstraintAtom::names).collect()
    }
}

impl fmt::Display for DataConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        let parts: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" & "))
    }
}

impl Serialize for DataConstraint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Total assignment of data items to the names of a sync-set.
pub type DataAssignment = BTreeMap<Name, DataItem>;

/// An equivalence class of names that must carry the same item.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Class {
    members: Vec<Name>,
    domain: BTreeSet<DataItem>,
}

/// Solved form of a satisfiable constraint over a fixed sync-set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    classes: Vec<Class>,
    alphabet: BTreeSet<DataItem>,
}

impl Solution {
    /// Solves `g` over `sync`; `None` when unsatisfiable. Names of `g` outside
    /// `sync` are treated as existentially quantified.
    pub fn solve(g: &DataConstraint, sync: &BTreeSet<Name>, alphabet: &BTreeSet<DataItem>) -> Option<Solution> {
        let mut names: BTreeSet<&Name> = sync.iter().collect();
        names.extend(g.names());
        let index: BTreeMap<&Name, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut parent: Vec<usize> = (0..index.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for atom in &g.atoms {
            if let ConstraintAtom::Same(a, b) = atom {
                let (ra, rb) = (find(&mut parent, index[a]), find(&mut parent, index[b]));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut domains: BTreeMap<usize, BTreeSet<DataItem>> = BTreeMap::new();
        for atom in &g.atoms {
            let (name, allowed): (&Name, BTreeSet<DataItem>) = match atom {
                ConstraintAtom::Same(..) => continue,
                ConstraintAtom::Is(n, v) => (n, std::iter::once(v.clone()).collect()),
                ConstraintAtom::In(n, s) => (n, s.clone()),
            };
            let root = find(&mut parent, index[name]);
            let dom = domains.entry(root).or_insert_with(|| alphabet.clone());
            dom.retain(|v| allowed.contains(v));
        }
        let mut groups: BTreeMap<usize, Vec<Name>> = BTreeMap::new();
        for (n, &i) in &index {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push((*n).clone());
        }
        let mut classes = Vec::with_capacity(groups.len());
        for (root, members) in groups {
            let domain = domains.remove(&root).unwrap_or_else(|| alphabet.clone());
            if domain.is_empty() {
                return None;
            }
            let members: Vec<Name> = members.into_iter().filter(|m| sync.contains(m)).collect();
            if !members.is_empty() {
                classes.push(Class { members, domain });
            }
        }
        Some(Solution { classes, alphabet: alphabet.clone() })
    }

    /// Number of satisfying assignments (saturating).
    pub fn count(&self) -> usize {
        self.classes.iter().fold(1usize, |acc, c| acc.saturating_mul(c.domain.len()))
    }

    /// Every satisfying total assignment, sorted.
    pub fn assignments(&self) -> Vec<DataAssignment> {
        let mut out = vec![DataAssignment::new()];
        for class in &self.classes {
            let mut next = Vec::with_capacity(out.len() * class.domain.len());
            for partial in &out {
                for v in &class.domain {
                    let mut a = partial.clone();
                    for m in &class.members {
                        a.insert(m.clone(), v.clone());
                    }
                    next.push(a);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// Canonical constraint over the names kept in this solution.
    pub fn to_constraint(&self) -> DataConstraint {
        let mut atoms = Vec::new();
        for class in &self.classes {
            let head = &class.members[0];
            for m in &class.members[1..] {
                atoms.push(ConstraintAtom::Same(head.clone(), m.clone()));
            }
            if class.domain.len() == 1 {
                let v = class.domain.iter().next().expect("non-empty");
                atoms.push(ConstraintAtom::Is(head.clone(), v.clone()));
            } else if class.domain != self.alphabet {
                atoms.push(ConstraintAtom::In(head.clone(), class.domain.clone()));
            }
        }
        DataConstraint::from_atoms(atoms)
    }
}

/// Satisfiability of `g` over `sync`.
pub fn satisfiable(g: &DataConstraint, sync: &BTreeSet<Name>, alphabet: &BTreeSet<DataItem>) -> bool {
    Solution::solve(g, sync, alphabet).is_some()
}

/// All total assignments on `sync` satisfying `g`, in sorted order.
pub fn sat_assignments(g: &DataConstraint, sync: &BTreeSet<Name>, alphabet: &BTreeSet<DataItem>) -> Vec<DataAssignment> {
    Solution::solve(g, sync, alphabet).map(|s| s.assignments()).unwrap_or_default()
}

/// Eliminates every name outside `keep`, returning the canonical residue, or
/// `None` when `g` is unsatisfiable.
pub fn project(
    g: &DataConstraint,
    keep: &BTreeSet<Name>,
    alphabet: &BTreeSet<DataItem>,
) -> Option<DataConstraint> {
    Solution::solve(g, keep, alphabet).map(|s| s.to_constraint())
}
