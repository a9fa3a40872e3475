//! Lexical skeleton extraction for C translation units.
//!
//! Only three things survive: semicolons (statement budget), braces (block
//! structure) and control keywords. `else` and `else if` become IF, `for`
//! and `do` become WHILE, `switch`/`case`/`break` disappear. Everything else
//! is discarded, including the original expressions.
//!
//! Comments, string/char literals and preprocessor lines are removed before
//! tokenizing, so braces or semicolons inside them never count. Macros are
//! not expanded; macro-heavy code yields degraded skeletons.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SkeletonError {
    #[error("unbalanced braces in translation unit")]
    UnbalancedBraces,
    #[error("no function definitions found")]
    EmptyUnit,
}

/// The closed set of scalar types a generated program may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasicType {
    Int,
    Float,
    Double,
    Char,
    Long,
    Short,
}

impl BasicType {
    pub const ALL: [BasicType; 6] = [
        BasicType::Int,
        BasicType::Float,
        BasicType::Double,
        BasicType::Char,
        BasicType::Long,
        BasicType::Short,
    ];

    pub fn c_name(self) -> &'static str {
        match self {
            BasicType::Int => "int",
            BasicType::Float => "float",
            BasicType::Double => "double",
            BasicType::Char => "char",
            BasicType::Long => "long",
            BasicType::Short => "short",
        }
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..Self::ALL.len())]
    }
}

impl fmt::Display for BasicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.c_name())
    }
}

/// Return type of a skeleton function. `void` is kept as-is; it carries no
/// pointer and needs no value in emitted code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnType {
    Void,
    #[serde(untagged)]
    Basic(BasicType),
}

impl ReturnType {
    pub fn c_name(self) -> &'static str {
        match self {
            ReturnType::Void => "void",
            ReturnType::Basic(t) => t.c_name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Param {
    pub name: Option<String>,
    pub ty: BasicType,
}

/// A pointer-free function signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub returns: ReturnType,
    pub params: Vec<Param>,
}

impl Signature {
    pub fn render(&self, name: &str) -> String {
        let params = if self.params.is_empty() {
            "void".to_string()
        } else {
            self.params
                .iter()
                .map(|p| match &p.name {
                    Some(n) => format!("{} {}", p.ty, n),
                    None => p.ty.to_string(),
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!("{} {}({})", self.returns.c_name(), name, params)
    }
}

/// A declaration as written in the source, before type substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSignature {
    pub name: String,
    pub ret: Vec<String>,
    pub params: Vec<Vec<String>>,
}

impl RawSignature {
    /// Parses a single declarator such as `char* f(int* p)`.
    pub fn parse(text: &str) -> Option<RawSignature> {
        let toks = tokenize(&strip_noise(text));
        let open = toks.iter().position(|t| t.is_punct('('))?;
        let close = matching(&toks, open, '(', ')')?;
        let name = toks.get(open.checked_sub(1)?)?.ident()?.to_string();
        Some(RawSignature {
            name,
            ret: toks[..open - 1].iter().map(Tok::text).collect(),
            params: split_params(&toks[open + 1..close]),
        })
    }

    pub fn render(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|p| p.join(" ")).collect();
        format!("{} {}({})", self.ret.join(" "), self.name, params.join(", "))
    }
}

/// Replaces every pointer, array or non-basic type with a uniformly drawn
/// basic type. Already-basic types are kept.
pub fn substitute_signature<R: Rng + ?Sized>(raw: &RawSignature, rng: &mut R) -> Signature {
    let returns = match classify(&raw.ret) {
        TypeClass::Void => ReturnType::Void,
        TypeClass::Basic(t) => ReturnType::Basic(t),
        TypeClass::Other => ReturnType::Basic(BasicType::random(rng)),
    };
    let mut params = Vec::new();
    let only_void = raw.params.len() == 1 && raw.params[0].len() == 1 && raw.params[0][0] == "void";
    if !only_void {
        for p in &raw.params {
            if p.is_empty() || p.iter().all(|t| t == ".") {
                continue;
            }
            let (ty_toks, name) = split_param_name(p);
            let ty = match classify(&ty_toks) {
                TypeClass::Basic(t) => t,
                TypeClass::Void | TypeClass::Other => BasicType::random(rng),
            };
            params.push(Param { name, ty });
        }
    }
    Signature { returns, params }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SlotKind {
    If,
    While,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSlot {
    pub kind: SlotKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub body: Vec<ControlSlot>,
}

impl ControlSlot {
    pub fn leaf(kind: SlotKind) -> Self {
        ControlSlot { kind, body: Vec::new() }
    }

    pub fn nested(kind: SlotKind, body: Vec<ControlSlot>) -> Self {
        ControlSlot { kind, body }
    }
}

/// Largest number of IF nodes on any root-to-leaf chain.
pub fn max_nested_if(slots: &[ControlSlot]) -> u32 {
    slots
        .iter()
        .map(|s| u32::from(s.kind == SlotKind::If) + max_nested_if(&s.body))
        .max()
        .unwrap_or(0)
}

/// Index path (one index per tree level) to the first chain that realizes
/// [`max_nested_if`], ending at the innermost IF of that chain.
pub fn deepest_if_chain(slots: &[ControlSlot]) -> Vec<usize> {
    fn walk(slots: &[ControlSlot]) -> (u32, Vec<usize>) {
        let mut best = (0, Vec::new());
        for (i, s) in slots.iter().enumerate() {
            let (inner, mut path) = walk(&s.body);
            let here = u32::from(s.kind == SlotKind::If) + inner;
            if here > best.0 {
                path.insert(0, i);
                best = (here, path);
            }
        }
        best
    }
    walk(slots).1
}

/// Counts IF and WHILE nodes in a slot forest.
pub fn slot_census(slots: &[ControlSlot]) -> (usize, usize) {
    slots.iter().fold((0, 0), |(i, w), s| {
        let (ci, cw) = slot_census(&s.body);
        match s.kind {
            SlotKind::If => (i + 1 + ci, w + cw),
            SlotKind::While => (i + ci, w + 1 + cw),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSkeleton {
    pub name: String,
    #[serde(rename = "statements")]
    pub statement_count: u32,
    #[serde(rename = "slots")]
    pub control_slots: Vec<ControlSlot>,
    pub max_nested_if: u32,
    pub callees: Vec<String>,
    pub signature: Signature,
}

impl FunctionSkeleton {
    /// A skeleton with no statements and no control flow.
    pub fn empty(name: impl Into<String>) -> Self {
        FunctionSkeleton {
            name: name.into(),
            statement_count: 0,
            control_slots: Vec::new(),
            max_nested_if: 0,
            callees: Vec::new(),
            signature: Signature { returns: ReturnType::Void, params: Vec::new() },
        }
    }
}

/// One skeleton document per translation unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonDocument {
    pub functions: Vec<FunctionSkeleton>,
}

/// Extracts skeletons with a fixed substitution seed of zero.
pub fn extract_skeletons(source: &str) -> Result<Vec<FunctionSkeleton>, SkeletonError> {
    use rand::SeedableRng;
    extract_skeletons_with(source, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0))
}

pub fn extract_skeletons_with<R: Rng + ?Sized>(
    source: &str,
    rng: &mut R,
) -> Result<Vec<FunctionSkeleton>, SkeletonError> {
    Ok(extract_raw(source)?
        .into_iter()
        .map(|raw| {
            let signature = substitute_signature(&raw.signature, rng);
            FunctionSkeleton {
                name: raw.signature.name,
                statement_count: raw.statement_count,
                max_nested_if: max_nested_if(&raw.control_slots),
                control_slots: raw.control_slots,
                callees: raw.callees,
                signature,
            }
        })
        .collect())
}

/// A function definition before signature substitution.
#[derive(Debug, Clone)]
pub struct RawFunction {
    pub signature: RawSignature,
    pub statement_count: u32,
    pub control_slots: Vec<ControlSlot>,
    pub callees: Vec<String>,
}

pub fn extract_raw(source: &str) -> Result<Vec<RawFunction>, SkeletonError> {
    let toks = tokenize(&strip_noise(source));
    let mut out = Vec::new();
    let mut i = 0;
    // index just past the last top-level `;` or `}`
    let mut decl_start = 0;
    while i < toks.len() {
        match &toks[i] {
            Tok::Punct('{') => {
                let close = matching(&toks, i, '{', '}').ok_or(SkeletonError::UnbalancedBraces)?;
                if let Some((name_at, open)) = definition_header(&toks, decl_start, i) {
                    let body = &toks[i + 1..close];
                    let signature = RawSignature {
                        name: toks[name_at].text(),
                        ret: toks[decl_start..name_at].iter().map(Tok::text).collect(),
                        params: split_params(&toks[open + 1..i - 1]),
                    };
                    out.push(RawFunction {
                        signature,
                        statement_count: count_statements(body),
                        control_slots: BodyParser::new(body).parse_all(),
                        callees: collect_calls(body),
                    });
                    i = close + 1;
                    decl_start = i;
                } else {
                    // struct, union, enum or initializer; skip the block but
                    // keep the declaration open until its `;`
                    i = close + 1;
                }
            }
            Tok::Punct('}') => return Err(SkeletonError::UnbalancedBraces),
            Tok::Punct(';') => {
                i += 1;
                decl_start = i;
            }
            _ => i += 1,
        }
    }
    if out.is_empty() {
        return Err(SkeletonError::EmptyUnit);
    }
    Ok(out)
}

/// For a top-level `{` at `brace`, returns (name index, open paren index)
/// when the tokens since `decl_start` look like `... name ( params ) {`.
fn definition_header(toks: &[Tok], decl_start: usize, brace: usize) -> Option<(usize, usize)> {
    if brace == 0 || !toks[brace - 1].is_punct(')') || brace - 1 <= decl_start {
        return None;
    }
    let open = matching_back(toks, brace - 1)?;
    if open <= decl_start {
        return None;
    }
    let name_at = open - 1;
    let name = toks[name_at].ident()?;
    if is_keyword(name) || toks[decl_start..name_at].iter().any(|t| t.is_punct('=')) {
        return None;
    }
    Some((name_at, open))
}

fn count_statements(body: &[Tok]) -> u32 {
    let mut depth = 0i32;
    let mut n = 0;
    for t in body {
        match t {
            Tok::Punct('(') => depth += 1,
            Tok::Punct(')') => depth -= 1,
            Tok::Punct(';') if depth <= 0 => n += 1,
            _ => {}
        }
    }
    n
}

fn collect_calls(body: &[Tok]) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut calls = Vec::new();
    for w in body.windows(2) {
        if let (Some(name), true) = (w[0].ident(), w[1].is_punct('(')) {
            if !is_keyword(name) && seen.insert(name.to_string()) {
                calls.push(name.to_string());
            }
        }
    }
    calls
}

struct BodyParser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> BodyParser<'a> {
    fn new(toks: &'a [Tok]) -> Self {
        BodyParser { toks, pos: 0 }
    }

    fn parse_all(mut self) -> Vec<ControlSlot> {
        let mut out = Vec::new();
        while self.pos < self.toks.len() {
            self.statement(&mut out);
        }
        out
    }

    fn peek_ident(&self) -> Option<&'a str> {
        self.toks.get(self.pos).and_then(Tok::ident)
    }

    fn skip_parens(&mut self) {
        if self.toks.get(self.pos).is_some_and(|t| t.is_punct('(')) {
            self.pos = matching(self.toks, self.pos, '(', ')').map_or(self.toks.len(), |c| c + 1);
        }
    }

    fn child(&mut self) -> Vec<ControlSlot> {
        let mut body = Vec::new();
        if self.pos < self.toks.len() {
            self.statement(&mut body);
        }
        body
    }

    fn statement(&mut self, out: &mut Vec<ControlSlot>) {
        let Some(tok) = self.toks.get(self.pos) else {
            return;
        };
        match tok {
            Tok::Punct('{') => {
                let end = matching(self.toks, self.pos, '{', '}').unwrap_or(self.toks.len());
                self.pos += 1;
                while self.pos < end {
                    self.statement(out);
                }
                self.pos = end + 1;
            }
            Tok::Punct(';') | Tok::Punct('}') => self.pos += 1,
            Tok::Ident(word) => match word.as_str() {
                "if" => {
                    self.pos += 1;
                    self.skip_parens();
                    let body = self.child();
                    out.push(ControlSlot::nested(SlotKind::If, body));
                    if self.peek_ident() == Some("else") {
                        self.pos += 1;
                        if self.peek_ident() == Some("if") {
                            self.statement(out);
                        } else {
                            let body = self.child();
                            out.push(ControlSlot::nested(SlotKind::If, body));
                        }
                    }
                }
                "while" | "for" => {
                    self.pos += 1;
                    self.skip_parens();
                    let body = self.child();
                    out.push(ControlSlot::nested(SlotKind::While, body));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.child();
                    if self.peek_ident() == Some("while") {
                        self.pos += 1;
                        self.skip_parens();
                    }
                    if self.toks.get(self.pos).is_some_and(|t| t.is_punct(';')) {
                        self.pos += 1;
                    }
                    out.push(ControlSlot::nested(SlotKind::While, body));
                }
                "switch" => {
                    self.pos += 1;
                    self.skip_parens();
                    self.statement(out);
                }
                "case" => {
                    while self.pos < self.toks.len() && !self.toks[self.pos].is_punct(':') {
                        self.pos += 1;
                    }
                    self.pos += 1;
                }
                "else" => self.pos += 1,
                _ if self.toks.get(self.pos + 1).is_some_and(|t| t.is_punct(':')) => {
                    // label or `default:`
                    self.pos += 2;
                }
                _ => self.simple_statement(),
            },
            _ => self.simple_statement(),
        }
    }

    fn simple_statement(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.toks.get(self.pos) {
            match t {
                Tok::Punct('(') | Tok::Punct('[') => depth += 1,
                Tok::Punct(')') | Tok::Punct(']') => depth -= 1,
                Tok::Punct('{') => {
                    self.pos = matching(self.toks, self.pos, '{', '}').unwrap_or(self.toks.len());
                }
                Tok::Punct('}') if depth <= 0 => return,
                Tok::Punct(';') if depth <= 0 => {
                    self.pos += 1;
                    return;
                }
                _ => {}
            }
            self.pos += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(char),
    Lit,
}

impl Tok {
    fn is_punct(&self, c: char) -> bool {
        matches!(self, Tok::Punct(p) if *p == c)
    }

    fn ident(&self) -> Option<&str> {
        match self {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Punct(c) => c.to_string(),
            Tok::Lit => "0".to_string(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "if", "else", "while", "for", "do", "switch", "case", "default", "break", "continue",
    "return", "goto", "sizeof", "typedef", "struct", "union", "enum", "_Alignof", "alignof",
    "_Generic", "__attribute__", "__asm__", "asm", "_Static_assert",
];

fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Removes comments, string/char literals (replaced by a `0` literal) and
/// preprocessor lines. Newlines are preserved.
fn strip_noise(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if line_start && c == '#' {
            // directive, with backslash continuations
            while i < chars.len() && chars[i] != '\n' {
                if chars[i] == '\\' && chars.get(i + 1) == Some(&'\n') {
                    i += 1;
                    out.push('\n');
                }
                i += 1;
            }
            continue;
        }
        match (c, next) {
            ('/', Some('/')) => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ('/', Some('*')) => {
                i += 2;
                while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                    if chars[i] == '\n' {
                        out.push('\n');
                    }
                    i += 1;
                }
                i += 2;
                out.push(' ');
            }
            ('"', _) | ('\'', _) => {
                i += 1;
                while i < chars.len() && chars[i] != c && chars[i] != '\n' {
                    if chars[i] == '\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i += 1;
                out.push_str(" 0 ");
                line_start = false;
            }
            _ => {
                out.push(c);
                if c == '\n' {
                    line_start = true;
                } else if !c.is_whitespace() {
                    line_start = false;
                }
                i += 1;
            }
        }
    }
    out
}

fn tokenize(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                i += 1;
            }
            toks.push(Tok::Lit);
        } else {
            toks.push(Tok::Punct(c));
            i += 1;
        }
    }
    toks
}

fn matching(toks: &[Tok], open_at: usize, open: char, close: char) -> Option<usize> {
    let mut depth = 0usize;
    for (j, t) in toks.iter().enumerate().skip(open_at) {
        if t.is_punct(open) {
            depth += 1;
        } else if t.is_punct(close) {
            depth = depth.checked_sub(1)?;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

fn matching_back(toks: &[Tok], close_at: usize) -> Option<usize> {
    let mut depth = 0usize;
    for j in (0..=close_at).rev() {
        if toks[j].is_punct(')') {
            depth += 1;
        } else if toks[j].is_punct('(') {
            depth -= 1;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

fn split_params(toks: &[Tok]) -> Vec<Vec<String>> {
    let mut params = Vec::new();
    let mut cur = Vec::new();
    let mut depth = 0i32;
    for t in toks {
        match t {
            Tok::Punct('(') | Tok::Punct('[') => depth += 1,
            Tok::Punct(')') | Tok::Punct(']') => depth -= 1,
            Tok::Punct(',') if depth == 0 => {
                params.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(t.text());
    }
    if !cur.is_empty() {
        params.push(cur);
    }
    params
}

const QUALIFIERS: &[&str] = &[
    "const", "volatile", "static", "inline", "extern", "register", "restrict", "auto",
    "__inline", "__inline__", "__restrict", "__extension__", "signed", "unsigned",
];

const TYPE_WORDS: &[&str] = &["int", "char", "short", "long", "float", "double", "void"];

enum TypeClass {
    Void,
    Basic(BasicType),
    Other,
}

fn classify(tokens: &[String]) -> TypeClass {
    if tokens.iter().any(|t| t == "*" || t == "[" || t == "(") {
        return TypeClass::Other;
    }
    let had_sign = tokens.iter().any(|t| t == "signed" || t == "unsigned");
    let core: Vec<&str> = tokens
        .iter()
        .map(String::as_str)
        .filter(|t| !QUALIFIERS.contains(t))
        .collect();
    match core.as_slice() {
        [] if had_sign => TypeClass::Basic(BasicType::Int),
        ["void"] => TypeClass::Void,
        ["int"] => TypeClass::Basic(BasicType::Int),
        ["char"] => TypeClass::Basic(BasicType::Char),
        ["short"] | ["short", "int"] => TypeClass::Basic(BasicType::Short),
        ["long"] | ["long", "int"] | ["long", "long"] | ["long", "long", "int"] => {
            TypeClass::Basic(BasicType::Long)
        }
        ["float"] => TypeClass::Basic(BasicType::Float),
        ["double"] | ["long", "double"] => TypeClass::Basic(BasicType::Double),
        _ => TypeClass::Other,
    }
}

/// Splits a parameter's tokens into (type tokens, declared name).
fn split_param_name(p: &[String]) -> (Vec<String>, Option<String>) {
    let is_ident = |t: &str| t.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    if let Some(open) = p.iter().position(|t| t == "(") {
        // function pointer: `ret (*name)(args)`
        let name = p[open..].iter().find(|t| is_ident(t) && !QUALIFIERS.contains(&t.as_str()));
        return (p.to_vec(), name.cloned());
    }
    let end = p.iter().position(|t| t == "[").unwrap_or(p.len());
    let head = &p[..end];
    match head.last() {
        Some(last)
            if is_ident(last)
                && !TYPE_WORDS.contains(&last.as_str())
                && !QUALIFIERS.contains(&last.as_str())
                && head.len() >= 2 =>
        {
            let mut ty: Vec<String> = head[..head.len() - 1].to_vec();
            ty.extend_from_slice(&p[end..]);
            (ty, Some(last.clone()))
        }
        _ => (p.to_vec(), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use SlotKind::{If, While};

    fn only(src: &str) -> FunctionSkeleton {
        let mut v = extract_skeletons(src).unwrap();
        assert_eq!(v.len(), 1);
        v.remove(0)
    }

    const LISTING_ONE: &str = r#"
int main(int argc, char* argv[]){
    char a[3];
    int n = 0;
    fgets(a,3,stdin);
    while (n < 2) n++;
    if (strcmp(a[1], 'a') > 0){
        if (strcmp(a[2], 'b') < 0){
            if (strcmp(a[3], 'c') > 0){
                bug();
            }
        }
    }
    return 0;
}
"#;

    #[test]
    fn listing_one_shape() {
        let f = only(LISTING_ONE);
        assert_eq!(f.name, "main");
        assert_eq!(
            f.control_slots,
            vec![
                ControlSlot::leaf(While),
                ControlSlot::nested(
                    If,
                    vec![ControlSlot::nested(If, vec![ControlSlot::leaf(If)])]
                ),
            ]
        );
        assert_eq!(f.max_nested_if, 3);
        assert!(f.callees.contains(&"bug".to_string()));
        assert!(f.callees.contains(&"fgets".to_string()));
    }

    #[test]
    fn trivial_function() {
        let f = only("int f(void){return 0;}");
        assert_eq!(f.name, "f");
        assert_eq!(f.statement_count, 1);
        assert!(f.control_slots.is_empty());
        assert_eq!(f.max_nested_if, 0);
        assert!(f.signature.params.is_empty());
        assert_eq!(f.signature.returns, ReturnType::Basic(BasicType::Int));
    }

    #[test]
    fn else_if_and_for_rewrite() {
        let f = only("void g(int a, int b){ if(a){} else if(b){} for(;;){} }");
        assert_eq!(
            f.control_slots,
            vec![ControlSlot::leaf(If), ControlSlot::leaf(If), ControlSlot::leaf(While)]
        );
        assert_eq!(f.max_nested_if, 1);
        // the two semicolons in the for header are not statements
        assert_eq!(f.statement_count, 0);
    }

    #[test]
    fn plain_else_is_if_and_do_is_while() {
        let f = only(
            "int h(int x){ if (x) { x++; } else { if (x > 2) x--; } do { x--; } while (x > 0); return x; }",
        );
        assert_eq!(
            f.control_slots,
            vec![
                ControlSlot::leaf(If),
                ControlSlot::nested(If, vec![ControlSlot::leaf(If)]),
                ControlSlot::leaf(While),
            ]
        );
        assert_eq!(f.max_nested_if, 2);
        assert_eq!(f.statement_count, 5);
    }

    #[test]
    fn switch_and_break_are_dropped() {
        let f = only(
            "int s(int x){ switch (x) { case 1: if (x) x = 2; break; default: while (x) x--; } return x; }",
        );
        assert_eq!(f.control_slots, vec![ControlSlot::leaf(If), ControlSlot::leaf(While)]);
    }

    #[test]
    fn literals_and_comments_do_not_count() {
        let src = r#"
#include <stdio.h>
#define BLOCK { ; ; }
/* if (x) { ; } */
int p(void) {
    printf("{;} if (x) {");  // ; { if
    char c = '{';
    char d = ';';
    return 0;
}
"#;
        let f = only(src);
        assert!(f.control_slots.is_empty());
        assert_eq!(f.statement_count, 4);
        assert_eq!(f.callees, vec!["printf".to_string()]);
    }

    #[test]
    fn prototypes_structs_and_initializers_are_not_functions() {
        let src = r#"
struct point { int x; int y; };
static int table[] = { 1, 2, 3 };
int helper(int);
int helper(int v) { return v; }
int main(void) { struct point p = { 1, 2 }; return helper(p.x); }
"#;
        let fns = extract_skeletons(src).unwrap();
        let names: Vec<_> = fns.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["helper", "main"]);
        assert_eq!(fns[1].callees, vec!["helper".to_string()]);
        assert_eq!(fns[1].statement_count, 2);
    }

    #[test]
    fn errors() {
        assert_eq!(extract_skeletons("int f(void) { if (x) { ; }"), Err(SkeletonError::UnbalancedBraces));
        assert_eq!(extract_skeletons("int f(void) { } }"), Err(SkeletonError::UnbalancedBraces));
        assert_eq!(extract_skeletons("int x; int f(int);"), Err(SkeletonError::EmptyUnit));
        assert_eq!(extract_skeletons(""), Err(SkeletonError::EmptyUnit));
    }

    #[test]
    fn signature_substitution() {
        let raw = RawSignature::parse("char* f(int* p)").unwrap();
        assert_eq!(raw.name, "f");
        let a = substitute_signature(&raw, &mut ChaCha8Rng::seed_from_u64(7));
        let b = substitute_signature(&raw, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        assert!(matches!(a.returns, ReturnType::Basic(_)));
        assert_eq!(a.params.len(), 1);
        assert_eq!(a.params[0].name.as_deref(), Some("p"));

        let raw = RawSignature::parse("int f(int a)").unwrap();
        let s = substitute_signature(&raw, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(s.render("f"), "int f(int a)");
    }

    #[test]
    fn signature_type_mapping() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let raw = RawSignature::parse(
            "static unsigned long long g(const short int s, long double d, unsigned u, void (*cb)(int), int arr[4], ...)",
        )
        .unwrap();
        let s = substitute_signature(&raw, &mut rng);
        assert_eq!(s.returns, ReturnType::Basic(BasicType::Long));
        assert_eq!(s.params.len(), 5);
        assert_eq!(s.params[0], Param { name: Some("s".into()), ty: BasicType::Short });
        assert_eq!(s.params[1], Param { name: Some("d".into()), ty: BasicType::Double });
        assert_eq!(s.params[2], Param { name: Some("u".into()), ty: BasicType::Int });
        assert_eq!(s.params[3].name.as_deref(), Some("cb"));
        assert_eq!(s.params[4].name.as_deref(), Some("arr"));
        let v = substitute_signature(&RawSignature::parse("void v(void)").unwrap(), &mut rng);
        assert_eq!(v.render("v"), "void v(void)");
    }

    #[test]
    fn deepest_chain_points_at_innermost_if() {
        let slots = vec![
            ControlSlot::nested(If, vec![ControlSlot::leaf(If)]),
            ControlSlot::nested(While, vec![ControlSlot::nested(If, vec![
                ControlSlot::nested(While, vec![ControlSlot::nested(If, vec![ControlSlot::nested(If, vec![ControlSlot::leaf(While)])])]),
            ])]),
        ];
        assert_eq!(max_nested_if(&slots), 3);
        assert_eq!(deepest_if_chain(&slots), vec![1, 0, 0, 0, 0]);
        assert!(deepest_if_chain(&[ControlSlot::leaf(While)]).is_empty());
        assert_eq!(slot_census(&slots), (5, 3));
    }

    #[test]
    fn document_json_shape() {
        let doc = SkeletonDocument { functions: vec![only("int f(void){ if (1) { return 0; } return 1; }")] };
        let v = serde_json::to_value(&doc).unwrap();
        let f = &v["functions"][0];
        for key in ["name", "statements", "slots", "max_nested_if", "callees", "signature"] {
            assert!(f.get(key).is_some(), "missing {key}");
        }
        assert_eq!(f["slots"][0]["kind"], "IF");
        let back: SkeletonDocument = serde_json::from_value(v).unwrap();
        assert_eq!(back, doc);
    }
}
