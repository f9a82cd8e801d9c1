use super::sexpr::{self, Pos, Sexp};
use super::PddlError;

const SUPPORTED_REQUIREMENTS: [&str; 3] = [":strips", ":typing", ":equality"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// An atom whose arguments are objects or `?variables`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
    pub pos: Pos,
}

/// `(= a b)` or `(not (= a b))` in a precondition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equality {
    pub left: String,
    pub right: String,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub pre: Vec<Atom>,
    pub equalities: Vec<Equality>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent type.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub schemas: Vec<ActionSchema>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
}

fn syntax(pos: Pos, message: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

fn unsupported(construct: &str, pos: Pos) -> PddlError {
    PddlError::Unsupported {
        construct: construct.to_string(),
        line: pos.line,
        col: pos.col,
    }
}

fn expect_list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], PddlError> {
    e.list()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn expect_atom<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    e.atom()
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn is_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_alphabetic())
        && s.chars()
            .all(|c| c.is_alphanumeric() || c == '-' || c == '_')
}

fn expect_name<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    let s = expect_atom(e, what)?;
    if !is_name(s) {
        return Err(syntax(e.pos(), format!("'{s}' is not a valid {what}")));
    }
    Ok(s)
}

/// `a b - t c - u d` with `object` as the default type.
fn typed_list(items: &[Sexp], variables: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.atom() == Some("-") {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| syntax(item.pos(), "missing type after '-'"))?;
            if ty.head() == Some("either") {
                return Err(unsupported("either", ty.pos()));
            }
            let ty = expect_name(ty, "type name")?;
            if pending.is_empty() {
                return Err(syntax(item.pos(), "type without names"));
            }
            out.extend(pending.drain(..).map(|name| TypedName {
                name,
                ty: ty.to_string(),
            }));
            i += 2;
            continue;
        }
        let name = expect_atom(item, "name")?;
        let bare = match (variables, name.strip_prefix('?')) {
            (true, Some(v)) => v,
            (true, None) => {
                return Err(syntax(
                    item.pos(),
                    format!("expected a variable, found '{name}'"),
                ))
            }
            (false, _) => name,
        };
        if !is_name(bare) {
            return Err(syntax(item.pos(), format!("'{name}' is not a valid name")));
        }
        pending.push(name.to_string());
        i += 1;
    }
    out.extend(pending.into_iter().map(|name| TypedName {
        name,
        ty: "object".to_string(),
    }));
    Ok(out)
}

fn parse_atom(e: &Sexp, allow_variables: bool) -> Result<Atom, PddlError> {
    let items = expect_list(e, "an atom")?;
    let head = items.first().ok_or_else(|| syntax(e.pos(), "empty atom"))?;
    let predicate = expect_name(head, "predicate name")?;
    let mut args = Vec::with_capacity(items.len() - 1);
    for arg in &items[1..] {
        let a = expect_atom(arg, "an object or variable")?;
        match a.strip_prefix('?') {
            Some(v) if allow_variables && is_name(v) => {}
            Some(_) if !allow_variables => {
                return Err(syntax(arg.pos(), format!("variable {a} in a ground atom")))
            }
            _ if is_name(a) => {}
            _ => return Err(syntax(arg.pos(), format!("'{a}' is not a valid argument"))),
        }
        args.push(a.to_string());
    }
    Ok(Atom {
        predicate: predicate.to_string(),
        args,
        pos: e.pos(),
    })
}

const REJECTED_CONDITIONS: [&str; 6] = ["or", "imply", "exists", "forall", "when", "preference"];

/// A positive conjunction. `(and)` is empty; a single atom needs no `and`.
fn conjunction(
    e: &Sexp,
    allow_variables: bool,
    atoms: &mut Vec<Atom>,
    equalities: Option<&mut Vec<Equality>>,
    negation: &str,
) -> Result<(), PddlError> {
    let mut equalities = equalities;
    let items = expect_list(e, "a condition")?;
    match e.head() {
        Some("and") => {
            for item in &items[1..] {
                conjunction(
                    item,
                    allow_variables,
                    atoms,
                    equalities.as_deref_mut(),
                    negation,
                )?;
            }
        }
        Some("not") => {
            let inner = items.get(1).filter(|_| items.len() == 2);
            let inner = inner.ok_or_else(|| syntax(e.pos(), "'not' takes one argument"))?;
            match (inner.head(), equalities) {
                (Some("="), Some(eqs)) => eqs.push(equality(inner, false)?),
                _ => return Err(unsupported(negation, e.pos())),
            }
        }
        Some("=") => match equalities {
            Some(eqs) => eqs.push(equality(e, true)?),
            None => return Err(unsupported("=", e.pos())),
        },
        Some(h) if REJECTED_CONDITIONS.contains(&h) => return Err(unsupported(h, e.pos())),
        None if items.is_empty() => {}
        _ => atoms.push(parse_atom(e, allow_variables)?),
    }
    Ok(())
}

fn equality(e: &Sexp, equal: bool) -> Result<Equality, PddlError> {
    let items = expect_list(e, "an equality")?;
    if items.len() != 3 {
        return Err(syntax(e.pos(), "'=' takes two arguments"));
    }
    Ok(Equality {
        left: expect_atom(&items[1], "an object or variable")?.to_string(),
        right: expect_atom(&items[2], "an object or variable")?.to_string(),
        equal,
    })
}

const REJECTED_EFFECTS: [&str; 8] = [
    "when",
    "forall",
    "increase",
    "decrease",
    "assign",
    "scale-up",
    "scale-down",
    "or",
];

fn effects(e: &Sexp, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), PddlError> {
    let items = expect_list(e, "an effect")?;
    match e.head() {
        Some("and") => {
            for item in &items[1..] {
                effects(item, add, del)?;
            }
        }
        Some("not") => {
            if items.len() != 2 {
                return Err(syntax(e.pos(), "'not' takes one argument"));
            }
            if let Some(h) = items[1].head().filter(|h| REJECTED_EFFECTS.contains(h)) {
                return Err(unsupported(h, items[1].pos()));
            }
            del.push(parse_atom(&items[1], true)?);
        }
        Some(h) if REJECTED_EFFECTS.contains(&h) => return Err(unsupported(h, e.pos())),
        None if items.is_empty() => {}
        _ => add.push(parse_atom(e, true)?),
    }
    Ok(())
}

fn header<'a>(e: &'a Sexp, kind: &str) -> Result<(&'a [Sexp], String), PddlError> {
    let items = expect_list(e, "(define ...)")?;
    if e.head() != Some("define") {
        return Err(syntax(e.pos(), "expected (define ...)"));
    }
    let decl = items
        .get(1)
        .ok_or_else(|| syntax(e.pos(), format!("missing ({kind} name)")))?;
    let decl_items = expect_list(decl, &format!("({kind} name)"))?;
    if decl.head() != Some(kind) || decl_items.len() != 2 {
        return Err(syntax(decl.pos(), format!("expected ({kind} name)")));
    }
    let name = expect_name(&decl_items[1], &format!("{kind} name"))?;
    Ok((&items[2..], name.to_string()))
}

fn check_requirements(items: &[Sexp]) -> Result<Vec<String>, PddlError> {
    let mut out = Vec::new();
    for r in items {
        let req = expect_atom(r, "a requirement")?;
        if !SUPPORTED_REQUIREMENTS.contains(&req) {
            return Err(unsupported(req, r.pos()));
        }
        out.push(req.to_string());
    }
    Ok(out)
}

fn parse_action(items: &[Sexp], pos: Pos) -> Result<ActionSchema, PddlError> {
    let name = expect_name(
        items
            .get(1)
            .ok_or_else(|| syntax(pos, "action without a name"))?,
        "action name",
    )?;
    let mut schema = ActionSchema {
        name: name.to_string(),
        parameters: Vec::new(),
        pre: Vec::new(),
        equalities: Vec::new(),
        add: Vec::new(),
        del: Vec::new(),
    };
    let mut rest = items[2..].iter();
    while let Some(key) = rest.next() {
        let k = expect_atom(key, "an action keyword")?;
        let value = rest
            .next()
            .ok_or_else(|| syntax(key.pos(), format!("missing value for {k}")))?;
        match k {
            ":parameters" => {
                schema.parameters = typed_list(expect_list(value, "a parameter list")?, true)?
            }
            ":precondition" => conjunction(
                value,
                true,
                &mut schema.pre,
                Some(&mut schema.equalities),
                "negative precondition",
            )?,
            ":effect" => effects(value, &mut schema.add, &mut schema.del)?,
            _ => return Err(unsupported(k, key.pos())),
        }
    }
    let params: Vec<&str> = schema.parameters.iter().map(|p| p.name.as_str()).collect();
    let atoms = schema.pre.iter().chain(&schema.add).chain(&schema.del);
    for atom in atoms {
        if let Some(v) = atom
            .args
            .iter()
            .find(|a| a.starts_with('?') && !params.contains(&a.as_str()))
        {
            return Err(PddlError::UnboundVariable {
                variable: v.clone(),
                action: schema.name.clone(),
            });
        }
    }
    for eq in &schema.equalities {
        for side in [&eq.left, &eq.right] {
            if side.starts_with('?') && !params.contains(&side.as_str()) {
                return Err(PddlError::UnboundVariable {
                    variable: side.clone(),
                    action: schema.name.clone(),
                });
            }
        }
    }
    Ok(schema)
}

pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let root = sexpr::parse(text)?;
    let (sections, name) = header(&root, "domain")?;
    let mut domain = DomainAst {
        name,
        ..DomainAst::default()
    };
    for section in sections {
        let items = expect_list(section, "a domain section")?;
        let key = section
            .head()
            .ok_or_else(|| syntax(section.pos(), "expected a section keyword"))?;
        match key {
            ":requirements" => domain.requirements = check_requirements(&items[1..])?,
            ":types" => domain.types = typed_list(&items[1..], false)?,
            ":constants" => domain.constants = typed_list(&items[1..], false)?,
            ":predicates" => {
                for p in &items[1..] {
                    let parts = expect_list(p, "a predicate declaration")?;
                    let head = parts
                        .first()
                        .ok_or_else(|| syntax(p.pos(), "empty predicate declaration"))?;
                    domain.predicates.push(PredicateDecl {
                        name: expect_name(head, "predicate name")?.to_string(),
                        params: typed_list(&parts[1..], true)?,
                    });
                }
            }
            ":action" => domain.schemas.push(parse_action(items, section.pos())?),
            _ => return Err(unsupported(key, section.pos())),
        }
    }
    Ok(domain)
}

pub fn parse_problem(text: &str) -> Result<ProblemAst, PddlError> {
    let root = sexpr::parse(text)?;
    let (sections, name) = header(&root, "problem")?;
    let mut problem = ProblemAst {
        name,
        ..ProblemAst::default()
    };
    let mut saw_goal = false;
    for section in sections {
        let items = expect_list(section, "a problem section")?;
        let key = section
            .head()
            .ok_or_else(|| syntax(section.pos(), "expected a section keyword"))?;
        match key {
            ":domain" => {
                let d = items
                    .get(1)
                    .ok_or_else(|| syntax(section.pos(), "missing domain name"))?;
                problem.domain = expect_name(d, "domain name")?.to_string();
            }
            ":requirements" => {
                check_requirements(&items[1..])?;
            }
            ":objects" => problem.objects = typed_list(&items[1..], false)?,
            ":init" => {
                for fact in &items[1..] {
                    match fact.head() {
                        Some("not") => {
                            return Err(unsupported("negative initial fact", fact.pos()))
                        }
                        Some("=") => return Err(unsupported("=", fact.pos())),
                        _ => problem.init.push(parse_atom(fact, false)?),
                    }
                }
            }
            ":goal" => {
                let g = items
                    .get(1)
                    .ok_or_else(|| syntax(section.pos(), "missing goal"))?;
                conjunction(g, false, &mut problem.goal, None, "negative goal")?;
                saw_goal = true;
            }
            _ => return Err(unsupported(key, section.pos())),
        }
    }
    if !saw_goal {
        return Err(syntax(root.pos(), "problem has no :goal"));
    }
    Ok(problem)
}
