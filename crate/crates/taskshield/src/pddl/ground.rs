use std::collections::{BTreeMap, BTreeSet, HashMap};

use taskshield_core::strips::Fluent;
use taskshield_core::{FluentSet, GroundAction, PlanningTask};

use super::ast::{ActionSchema, Atom, DomainAst, ProblemAst};
use super::PddlError;

pub const DEFAULT_GROUND_ACTION_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Grounded {
    pub task: PlanningTask,
    /// Ground actions dropped because they add and delete the same fluent.
    pub warnings: Vec<String>,
}

struct Types {
    parent: HashMap<String, String>,
}

impl Types {
    fn new(domain: &DomainAst) -> Result<Self, PddlError> {
        let mut parent = HashMap::new();
        for t in &domain.types {
            parent.insert(t.name.clone(), t.ty.clone());
        }
        let types = Types { parent };
        for t in &domain.types {
            types.check(&t.ty)?;
            // Reject cycles.
            let mut seen = BTreeSet::new();
            let mut cur = t.name.as_str();
            while let Some(p) = types.parent.get(cur) {
                if !seen.insert(cur) {
                    return Err(PddlError::UnknownType(format!("{} (cyclic)", t.name)));
                }
                cur = p;
            }
        }
        Ok(types)
    }

    fn check(&self, ty: &str) -> Result<(), PddlError> {
        if ty == "object" || self.parent.contains_key(ty) {
            Ok(())
        } else {
            Err(PddlError::UnknownType(ty.to_string()))
        }
    }

    fn is_subtype(&self, ty: &str, of: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.parent.len() {
            if cur == of {
                return true;
            }
            match self.parent.get(cur) {
                Some(p) => cur = p,
                None => return of == "object",
            }
        }
        false
    }
}

struct Grounder<'a> {
    types: Types,
    predicates: HashMap<&'a str, (usize, Vec<&'a str>)>,
    /// Object name to type.
    objects: BTreeMap<&'a str, &'a str>,
    fluents: BTreeSet<(usize, Vec<String>)>,
}

fn atom_name(predicate: &str, args: &[String]) -> String {
    if args.is_empty() {
        predicate.to_string()
    } else {
        format!("{predicate}({})", args.join(" "))
    }
}

impl<'a> Grounder<'a> {
    fn predicate(&self, atom: &Atom) -> Result<usize, PddlError> {
        let (index, params) = self
            .predicates
            .get(atom.predicate.as_str())
            .ok_or_else(|| PddlError::UnknownPredicate(atom.predicate.clone()))?;
        if params.len() != atom.args.len() {
            return Err(PddlError::Arity {
                predicate: atom.predicate.clone(),
                expected: params.len(),
                found: atom.args.len(),
            });
        }
        Ok(*index)
    }

    fn object_type(&self, name: &str) -> Result<&'a str, PddlError> {
        self.objects
            .get(name)
            .copied()
            .ok_or_else(|| PddlError::UnknownObject(name.to_string()))
    }

    /// Checks a ground atom against the predicate signature.
    fn ground_atom(&mut self, atom: &Atom) -> Result<(usize, Vec<String>), PddlError> {
        let p = self.predicate(atom)?;
        let params = &self.predicates[atom.predicate.as_str()].1;
        for (arg, &ty) in atom.args.iter().zip(params) {
            let actual = self.object_type(arg)?;
            if !self.types.is_subtype(actual, ty) {
                return Err(PddlError::TypeMismatch {
                    object: arg.clone(),
                    expected: ty.to_string(),
                    found: actual.to_string(),
                });
            }
        }
        Ok((p, atom.args.clone()))
    }

    fn register(&mut self, key: (usize, Vec<String>)) {
        self.fluents.insert(key);
    }
}

struct Lifted {
    predicate: usize,
    /// Either a parameter position or a constant object.
    args: Vec<Result<usize, String>>,
}

fn lift(schema: &ActionSchema, atom: &Atom, predicate: usize) -> Lifted {
    let args = atom
        .args
        .iter()
        .map(
            |a| match schema.parameters.iter().position(|p| &p.name == a) {
                Some(i) => Ok(i),
                None => Err(a.clone()),
            },
        )
        .collect();
    Lifted { predicate, args }
}

fn instantiate(l: &Lifted, binding: &[&str]) -> (usize, Vec<String>) {
    let args = l
        .args
        .iter()
        .map(|a| match a {
            Ok(i) => binding[*i].to_string(),
            Err(c) => c.clone(),
        })
        .collect();
    (l.predicate, args)
}

/// Instantiates every schema over every type-consistent binding. Schemas
/// are taken in name order and bindings in lexicographic order of object
/// names. Fluents are the atoms of ground actions, initial state and goal,
/// plus every nullary predicate, ordered by predicate declaration and then
/// arguments.
pub fn ground(domain: &DomainAst, problem: &ProblemAst, cap: usize) -> Result<Grounded, PddlError> {
    if !problem.domain.is_empty() && problem.domain != domain.name {
        return Err(PddlError::DomainMismatch {
            expected: domain.name.clone(),
            found: problem.domain.clone(),
        });
    }
    let types = Types::new(domain)?;
    let mut predicates = HashMap::new();
    for (i, p) in domain.predicates.iter().enumerate() {
        for param in &p.params {
            types.check(&param.ty)?;
        }
        let sig = p.params.iter().map(|t| t.ty.as_str()).collect();
        if predicates.insert(p.name.as_str(), (i, sig)).is_some() {
            return Err(PddlError::Duplicate(format!("predicate {}", p.name)));
        }
    }
    let mut objects = BTreeMap::new();
    for o in domain.constants.iter().chain(&problem.objects) {
        types.check(&o.ty)?;
        if objects.insert(o.name.as_str(), o.ty.as_str()).is_some() {
            return Err(PddlError::Duplicate(format!("object {}", o.name)));
        }
    }
    let mut g = Grounder {
        types,
        predicates,
        objects,
        fluents: BTreeSet::new(),
    };

    let mut init = Vec::new();
    for a in &problem.init {
        let key = g.ground_atom(a)?;
        g.register(key.clone());
        init.push(key);
    }
    let mut goal = Vec::new();
    for a in &problem.goal {
        let key = g.ground_atom(a)?;
        g.register(key.clone());
        goal.push(key);
    }
    for (i, p) in domain.predicates.iter().enumerate() {
        if p.params.is_empty() {
            g.register((i, Vec::new()));
        }
    }

    let mut schemas: Vec<&ActionSchema> = domain.schemas.iter().collect();
    schemas.sort_by(|a, b| a.name.cmp(&b.name));
    for w in schemas.windows(2) {
        if w[0].name == w[1].name {
            return Err(PddlError::Duplicate(format!("action {}", w[0].name)));
        }
    }

    struct Raw {
        name: String,
        pre: Vec<(usize, Vec<String>)>,
        add: Vec<(usize, Vec<String>)>,
        del: Vec<(usize, Vec<String>)>,
    }
    let mut raw: Vec<Raw> = Vec::new();
    let mut warnings = Vec::new();

    for schema in schemas {
        for p in &schema.parameters {
            g.types.check(&p.ty)?;
        }
        let lifted = |atoms: &[Atom]| -> Result<Vec<Lifted>, PddlError> {
            atoms
                .iter()
                .map(|a| {
                    let p = g.predicate(a)?;
                    for arg in a.args.iter().filter(|x| !x.starts_with('?')) {
                        g.object_type(arg)?;
                    }
                    Ok(lift(schema, a, p))
                })
                .collect()
        };
        let pre = lifted(&schema.pre)?;
        let add = lifted(&schema.add)?;
        let del = lifted(&schema.del)?;
        for eq in &schema.equalities {
            for side in [&eq.left, &eq.right] {
                if !side.starts_with('?') {
                    g.object_type(side)?;
                }
            }
        }
        let side = |s: &str, binding: &[&'_ str]| -> String {
            match schema.parameters.iter().position(|p| p.name == s) {
                Some(i) => binding[i].to_string(),
                None => s.to_string(),
            }
        };

        let candidates: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|p| {
                g.objects
                    .iter()
                    .filter(|(_, &ty)| g.types.is_subtype(ty, &p.ty))
                    .map(|(&name, _)| name)
                    .collect()
            })
            .collect();
        if candidates.iter().any(Vec::is_empty) {
            continue;
        }

        // Odometer over candidate indices, last parameter fastest.
        let mut idx = vec![0usize; candidates.len()];
        loop {
            let binding: Vec<&str> = idx.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
            let consistent = schema
                .equalities
                .iter()
                .all(|eq| (side(&eq.left, &binding) == side(&eq.right, &binding)) == eq.equal);
            if consistent {
                let name = if binding.is_empty() {
                    schema.name.clone()
                } else {
                    format!("{}({})", schema.name, binding.join(" "))
                };
                let inst = |ls: &[Lifted]| ls.iter().map(|l| instantiate(l, &binding)).collect();
                let r = Raw {
                    name,
                    pre: inst(&pre),
                    add: inst(&add),
                    del: inst(&del),
                };
                if r.add.iter().any(|a| r.del.contains(a)) {
                    warnings.push(format!(
                        "dropped ground action {}: it adds and deletes the same atom",
                        r.name
                    ));
                } else {
                    if raw.len() >= cap {
                        return Err(PddlError::GroundLimit { cap });
                    }
                    raw.push(r);
                }
            }
            let mut k = idx.len();
            let exhausted = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < candidates[k].len() {
                    break false;
                }
                idx[k] = 0;
            };
            if exhausted {
                break;
            }
        }
    }

    for r in &raw {
        for key in r.pre.iter().chain(&r.add).chain(&r.del) {
            g.register(key.clone());
        }
    }
    let keys: Vec<(usize, Vec<String>)> = g.fluents.into_iter().collect();
    let id_of: HashMap<&(usize, Vec<String>), usize> =
        keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let n = keys.len();
    let set =
        |atoms: &[(usize, Vec<String>)]| FluentSet::from_ids(n, atoms.iter().map(|a| id_of[a]));
    let fluents = keys
        .iter()
        .enumerate()
        .map(|(id, (p, args))| Fluent {
            id,
            name: atom_name(&domain.predicates[*p].name, args),
        })
        .collect();
    let actions = raw
        .iter()
        .map(|r| GroundAction {
            name: r.name.clone(),
            pre: set(&r.pre),
            add: set(&r.add),
            del: set(&r.del),
            cost: 1.0,
        })
        .collect();
    Ok(Grounded {
        task: PlanningTask {
            fluents,
            actions,
            init: set(&init),
            goal: set(&goal),
        },
        warnings,
    })
}
