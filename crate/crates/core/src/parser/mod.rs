//! Recursive-descent parser for textual QIR.
//!
//! The accepted grammar is the minimal concrete syntax for the quantum
//! subset: opaque type declarations, `define`/`declare`, labelled blocks,
//! call/bitcast/inttoptr/store/load/getelementptr/icmp/alloca commands and
//! ret/br terminators. Compiler noise that carries no meaning for the
//! analysis (attribute groups, metadata, `inbounds`, parameter attributes)
//! is skipped with a warning. Errors are accumulated with panic-mode
//! recovery at line boundaries; a dropped region is always covered by an
//! error.

mod lexer;

pub use lexer::{lex, Token, TokenKind};

use crate::ast::{
    Block, Constant, Function, IcmpPredicate, InstKind, Instruction, Operand, PhiNode, QirModule,
    SourceSpan, TermKind, Terminator, Type, TypeDecl,
};
use indexmap::IndexMap;

/// Default cap on accumulated parse errors before giving up.
pub const DEFAULT_MAX_ERRORS: usize = 25;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{message} at {span}")]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
    /// Token kinds that would have been accepted at this point.
    pub expected: Vec<String>,
    /// Description of the token actually seen.
    pub got: Option<String>,
}

impl ParseError {
    fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        Self {
            message: message.into(),
            span,
            expected: Vec::new(),
            got: None,
        }
    }

    fn illegal_char(c: char, span: SourceSpan) -> Self {
        Self {
            message: format!("illegal character {c:?}"),
            span,
            expected: Vec::new(),
            got: Some(format!("{c:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseWarning {
    pub message: String,
    pub span: SourceSpan,
}

/// Parses one file into a module. On success the module still needs
/// [`crate::ast::validate_module`]; parse success only guarantees shape.
pub fn parse_module(
    source: &str,
    filename: &str,
) -> Result<(QirModule, Vec<ParseWarning>), Vec<ParseError>> {
    parse_module_with_limit(source, filename, DEFAULT_MAX_ERRORS)
}

/// Like [`parse_module`] with an explicit error cap.
pub fn parse_module_with_limit(
    source: &str,
    filename: &str,
    max_errors: usize,
) -> Result<(QirModule, Vec<ParseWarning>), Vec<ParseError>> {
    let tokens = match lex(source) {
        Ok(tokens) => tokens,
        Err(e) => return Err(vec![e]),
    };
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        errors: Vec::new(),
        warnings: Vec::new(),
        max_errors: max_errors.max(1),
        nesting: 0,
    };
    let module = parser.parse_module(filename);
    if parser.errors.is_empty() {
        Ok((module, parser.warnings))
    } else {
        Err(parser.errors)
    }
}

/// Words allowed between `define`/`declare` and the return type. Stored
/// verbatim so the printer can reproduce them.
const QUALIFIER_WORDS: &[&str] = &[
    "internal",
    "external",
    "private",
    "dso_local",
    "weak",
    "weak_odr",
    "linkonce",
    "linkonce_odr",
    "common",
    "appending",
    "available_externally",
    "extern_weak",
    "fastcc",
    "ccc",
    "tailcc",
    "hidden",
    "protected",
];

/// Parameter attribute words that are skipped with a warning.
const PARAM_ATTR_WORDS: &[&str] = &[
    "readonly",
    "writeonly",
    "readnone",
    "nocapture",
    "nonnull",
    "noalias",
    "nofree",
    "noundef",
    "sret",
    "zeroext",
    "signext",
];

/// Nesting cap for types and constants; keeps adversarial input from
/// overflowing the stack.
const MAX_NESTING: usize = 64;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    errors: Vec<ParseError>,
    warnings: Vec<ParseWarning>,
    max_errors: usize,
    nesting: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + offset)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let tok = self.tokens.get(self.pos);
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn current_span(&self) -> SourceSpan {
        match self.peek() {
            Some(tok) => tok.span,
            None => self.tokens.last().map(|t| t.span).unwrap_or_default(),
        }
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            message: message.into(),
            span: self.current_span(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            got: self.peek().map(|t| t.kind.describe()),
        }
    }

    fn warn(&mut self, message: impl Into<String>, span: SourceSpan) {
        self.warnings.push(ParseWarning {
            message: message.into(),
            span,
        });
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Word(w), .. }) if w == word)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<SourceSpan> {
        if self.is_word(word) {
            let span = self.current_span();
            self.pos += 1;
            Ok(span)
        } else {
            Err(self.error_here(format!("expected \"{word}\""), &[word]))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Punct(p), .. }) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<SourceSpan> {
        if matches!(self.peek(), Some(Token { kind: TokenKind::Punct(p), .. }) if *p == c) {
            let span = self.current_span();
            self.pos += 1;
            Ok(span)
        } else {
            Err(self.error_here(format!("expected '{c}'"), &[&c.to_string()]))
        }
    }

    /// Widens `start` to the end of the last consumed token when it sits on
    /// the same line, so carets cover the whole instruction.
    fn close_span(&self, start: SourceSpan) -> SourceSpan {
        match self.pos.checked_sub(1).and_then(|i| self.tokens.get(i)) {
            Some(last) if last.span.line == start.line => SourceSpan {
                line: start.line,
                col_start: start.col_start,
                col_end: last.span.col_end,
            },
            _ => start,
        }
    }

    fn record_error(&mut self, err: ParseError) {
        if self.errors.len() < self.max_errors {
            self.errors.push(err);
        }
    }

    /// Panic-mode recovery: skip the rest of the line the error occurred on.
    fn sync_to_next_line(&mut self, error_line: u32) {
        while let Some(tok) = self.peek() {
            if tok.span.line > error_line {
                break;
            }
            if matches!(tok.kind, TokenKind::Punct('}')) {
                break;
            }
            self.pos += 1;
        }
    }

    // ---- module -----------------------------------------------------------

    fn parse_module(&mut self, filename: &str) -> QirModule {
        let mut module = QirModule {
            source_file: filename.to_string(),
            type_decls: IndexMap::new(),
            functions: IndexMap::new(),
        };

        while !self.at_end() {
            if self.errors.len() >= self.max_errors {
                break;
            }
            let line = self.current_span().line;
            let result = self.parse_top_item(&mut module);
            if let Err(err) = result {
                let err_line = err.span.line.max(line);
                self.record_error(err);
                self.sync_to_next_line(err_line);
                // A stray '}' from a failed function body would wedge the
                // top level; consume it.
                self.eat_punct('}');
            }
        }
        module
    }

    fn parse_top_item(&mut self, module: &mut QirModule) -> PResult<()> {
        let Some(tok) = self.peek() else {
            return Ok(());
        };
        match &tok.kind {
            TokenKind::Percent(name) => {
                let name = name.clone();
                self.pos += 1;
                self.expect_punct('=')?;
                self.expect_word("type")?;
                let decl = if self.eat_word("opaque") {
                    TypeDecl::Opaque
                } else if self.eat_punct('{') {
                    let mut fields = Vec::new();
                    if !self.eat_punct('}') {
                        loop {
                            fields.push(self.parse_type()?);
                            if self.eat_punct(',') {
                                continue;
                            }
                            self.expect_punct('}')?;
                            break;
                        }
                    }
                    TypeDecl::Struct(fields)
                } else {
                    return Err(
                        self.error_here("expected \"opaque\" or struct body", &["opaque", "{"])
                    );
                };
                module.type_decls.insert(name, decl);
                Ok(())
            }
            TokenKind::Word(w) if w == "define" => {
                let func = self.parse_function(false)?;
                module.functions.insert(func.name.clone(), func);
                Ok(())
            }
            TokenKind::Word(w) if w == "declare" => {
                let func = self.parse_function(true)?;
                module.functions.insert(func.name.clone(), func);
                Ok(())
            }
            TokenKind::Word(w) if w == "source_filename" || w == "target" => {
                // Module header noise from real compiler output.
                let line = tok.span.line;
                let span = tok.span;
                self.warn(format!("skipped module-level directive \"{w}\""), span);
                self.sync_to_next_line(line);
                Ok(())
            }
            TokenKind::Punct('!') => {
                let line = tok.span.line;
                let span = tok.span;
                self.warn("skipped metadata", span);
                self.sync_to_next_line(line);
                Ok(())
            }
            _ => Err(self.error_here(
                "expected a type declaration, \"define\", or \"declare\"",
                &["define", "declare", "%Name = type"],
            )),
        }
    }

    // ---- functions ---------------------------------------------------------

    fn parse_function(&mut self, is_declaration: bool) -> PResult<Function> {
        self.bump(); // define/declare

        let mut qualifiers = Vec::new();
        while let Some(Token {
            kind: TokenKind::Word(w),
            ..
        }) = self.peek()
        {
            if QUALIFIER_WORDS.contains(&w.as_str()) {
                qualifiers.push(w.clone());
                self.pos += 1;
            } else {
                break;
            }
        }
        let linkage = if qualifiers.is_empty() {
            None
        } else {
            Some(qualifiers.join(" "))
        };

        let ret_type = self.parse_type()?;
        let name = match self.peek() {
            Some(Token {
                kind: TokenKind::Global(g),
                ..
            }) => {
                let g = g.clone();
                self.pos += 1;
                g
            }
            _ => return Err(self.error_here("expected function name", &["@name"])),
        };

        self.expect_punct('(')?;
        let mut params = Vec::new();
        if !self.eat_punct(')') {
            loop {
                let ty = self.parse_type()?;
                // Skip parameter attributes such as `readonly`.
                while let Some(Token {
                    kind: TokenKind::Word(w),
                    span,
                    ..
                }) = self.peek()
                {
                    if PARAM_ATTR_WORDS.contains(&w.as_str()) {
                        let (w, span) = (w.clone(), *span);
                        self.pos += 1;
                        self.warn(format!("skipped parameter attribute \"{w}\""), span);
                    } else {
                        break;
                    }
                }
                let pname = match self.peek() {
                    Some(Token {
                        kind: TokenKind::Percent(p),
                        ..
                    }) => {
                        let p = p.clone();
                        self.pos += 1;
                        Some(p)
                    }
                    _ => None,
                };
                params.push((ty, pname));
                if self.eat_punct(',') {
                    continue;
                }
                self.expect_punct(')')?;
                break;
            }
        }

        if is_declaration {
            self.skip_trailing_attrs(false)?;
            return Ok(Function {
                name,
                linkage,
                ret_type,
                params,
                blocks: Vec::new(),
                is_declaration: true,
            });
        }

        self.skip_trailing_attrs(true)?;
        self.expect_punct('{')?;
        let errors_before = self.errors.len();
        let mut blocks = Vec::new();
        while !self.eat_punct('}') {
            if self.at_end() {
                return Err(self.error_here("unterminated function body", &["}"]));
            }
            if self.errors.len() >= self.max_errors {
                break;
            }
            match self.parse_block() {
                Ok(block) => blocks.push(block),
                Err(err) => {
                    let line = err.span.line;
                    self.record_error(err);
                    self.sync_to_next_line(line);
                }
            }
        }
        if blocks.is_empty() && self.errors.len() == errors_before {
            return Err(ParseError::new(
                format!("function @{name} has no blocks"),
                self.current_span(),
            ));
        }
        Ok(Function {
            name,
            linkage,
            ret_type,
            params,
            blocks,
            is_declaration: false,
        })
    }

    /// Skips attribute groups (`#0`) and stray words between the parameter
    /// list and the function body / end of a declaration.
    fn skip_trailing_attrs(&mut self, until_brace: bool) -> PResult<()> {
        loop {
            match self.peek() {
                Some(Token {
                    kind: TokenKind::Punct('#'),
                    span,
                    ..
                }) => {
                    let span = *span;
                    self.pos += 1;
                    if matches!(
                        self.peek(),
                        Some(Token {
                            kind: TokenKind::Int(_),
                            ..
                        })
                    ) {
                        self.pos += 1;
                    }
                    self.warn("skipped attribute group", span);
                }
                Some(Token {
                    kind: TokenKind::Word(w),
                    span,
                    ..
                }) if w == "unnamed_addr" || w == "local_unnamed_addr" => {
                    let (w, span) = (w.clone(), *span);
                    self.pos += 1;
                    self.warn(format!("skipped \"{w}\""), span);
                }
                Some(Token {
                    kind: TokenKind::Punct('{'),
                    ..
                }) if until_brace => return Ok(()),
                _ if !until_brace => return Ok(()),
                _ => {
                    return Err(self.error_here("expected '{'", &["{"]));
                }
            }
        }
    }

    // ---- blocks ------------------------------------------------------------

    fn parse_block(&mut self) -> PResult<Block> {
        let label = match (self.peek(), self.peek_at(1)) {
            (
                Some(Token {
                    kind: TokenKind::Word(w),
                    ..
                }),
                Some(Token {
                    kind: TokenKind::Punct(':'),
                    ..
                }),
            ) => {
                let w = w.clone();
                self.pos += 2;
                w
            }
            _ => {
                return Err(self.error_here("expected a block label", &["label:"]));
            }
        };

        let mut phis = Vec::new();
        let mut instructions = Vec::new();
        loop {
            if self.at_end() {
                return Err(self.error_here("block has no terminator", &["ret", "br"]));
            }
            // A closing brace or a new label before a terminator: report it,
            // patch in a void return so parsing can continue at the label.
            let block_over = matches!(
                self.peek(),
                Some(Token {
                    kind: TokenKind::Punct('}'),
                    ..
                })
            ) || matches!(
                (self.peek(), self.peek_at(1)),
                (
                    Some(Token {
                        kind: TokenKind::Word(_),
                        ..
                    }),
                    Some(Token {
                        kind: TokenKind::Punct(':'),
                        ..
                    }),
                )
            );
            if block_over {
                let err = self.error_here("block has no terminator", &["ret", "br"]);
                let span = err.span;
                self.record_error(err);
                return Ok(Block {
                    label,
                    phis,
                    instructions,
                    terminator: Terminator {
                        kind: TermKind::RetVoid,
                        span,
                    },
                });
            }

            let start = self.current_span();
            if self.is_word("ret") || self.is_word("br") {
                match self.parse_terminator() {
                    Ok(mut terminator) => {
                        terminator.span = self.close_span(start);
                        return Ok(Block {
                            label,
                            phis,
                            instructions,
                            terminator,
                        });
                    }
                    Err(err) => {
                        // The terminator was malformed but present; patch it
                        // and hand the block back.
                        let line = err.span.line;
                        let span = err.span;
                        self.record_error(err);
                        self.sync_to_next_line(line);
                        return Ok(Block {
                            label,
                            phis,
                            instructions,
                            terminator: Terminator {
                                kind: TermKind::RetVoid,
                                span,
                            },
                        });
                    }
                }
            }

            match self.parse_instruction() {
                Ok(BlockItem::Instruction(mut inst)) => {
                    inst.span = self.close_span(start);
                    instructions.push(inst);
                }
                Ok(BlockItem::Phi(mut phi)) => {
                    phi.span = self.close_span(start);
                    phis.push(phi);
                }
                Err(err) => {
                    // Panic-mode recovery: the rest of the offending line is
                    // dropped, covered by the recorded error.
                    if self.errors.len() + 1 >= self.max_errors {
                        return Err(err);
                    }
                    let line = err.span.line.max(start.line);
                    self.record_error(err);
                    self.sync_to_next_line(line);
                }
            }
        }
    }

    fn parse_terminator(&mut self) -> PResult<Terminator> {
        let span = self.current_span();
        if self.eat_word("ret") {
            if self.eat_word("void") {
                return Ok(Terminator {
                    kind: TermKind::RetVoid,
                    span,
                });
            }
            let type_start = matches!(
                self.peek(),
                Some(Token {
                    kind: TokenKind::Word(_) | TokenKind::Percent(_),
                    ..
                })
            ) || matches!(
                self.peek(),
                Some(Token {
                    kind: TokenKind::Punct('[') | TokenKind::Punct('{'),
                    ..
                })
            );
            if type_start {
                let ty = self.parse_type()?;
                let value = self.parse_operand(&ty)?;
                self.skip_line_metadata(span.line);
                return Ok(Terminator {
                    kind: TermKind::Ret { ty, value },
                    span,
                });
            }
            let mut err = self.error_here(
                "ret requires \"void\" or a typed value",
                &["void", "type value"],
            );
            err.span = span;
            return Err(err);
        }
        self.expect_word("br")?;
        if self.eat_word("label") {
            let label = self.parse_label_ref()?;
            self.skip_line_metadata(span.line);
            return Ok(Terminator {
                kind: TermKind::Branch { label },
                span,
            });
        }
        let cond_ty = self.parse_type()?;
        if cond_ty != Type::Int(1) {
            self.warn("branch condition type is not i1", span);
        }
        let cond = self.parse_operand(&cond_ty)?;
        self.expect_punct(',')?;
        self.expect_word("label")?;
        let then_label = self.parse_label_ref()?;
        self.expect_punct(',')?;
        self.expect_word("label")?;
        let else_label = self.parse_label_ref()?;
        self.skip_line_metadata(span.line);
        Ok(Terminator {
            kind: TermKind::CondBranch {
                cond,
                then_label,
                else_label,
            },
            span,
        })
    }

    fn parse_label_ref(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Percent(p),
                ..
            }) => {
                let p = p.clone();
                self.pos += 1;
                Ok(p)
            }
            _ => Err(self.error_here("expected a label reference", &["%label"])),
        }
    }

    // ---- instructions ------------------------------------------------------

    fn parse_instruction(&mut self) -> PResult<BlockItem> {
        let span = self.current_span();
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Word(w)) if w == "call" => {
                let kind = self.parse_call(None)?;
                self.skip_line_metadata(span.line);
                Ok(BlockItem::Instruction(Instruction { kind, span }))
            }
            Some(TokenKind::Word(w)) if w == "store" => {
                let kind = self.parse_store()?;
                self.skip_line_metadata(span.line);
                Ok(BlockItem::Instruction(Instruction { kind, span }))
            }
            Some(TokenKind::Percent(name)) => {
                let result = name.clone();
                self.pos += 1;
                self.expect_punct('=')?;
                let opcode = match self.peek() {
                    Some(Token {
                        kind: TokenKind::Word(w),
                        ..
                    }) => w.clone(),
                    _ => return Err(self.error_here("expected an opcode", &["opcode"])),
                };
                let item = match opcode.as_str() {
                    "call" => {
                        let kind = self.parse_call(Some(result))?;
                        BlockItem::Instruction(Instruction { kind, span })
                    }
                    "bitcast" | "inttoptr" => {
                        self.pos += 1;
                        let from_type = self.parse_type()?;
                        let value = self.parse_operand(&from_type)?;
                        self.expect_word("to")?;
                        let to_type = self.parse_type()?;
                        let kind = if opcode == "bitcast" {
                            InstKind::Bitcast {
                                result,
                                from_type,
                                value,
                                to_type,
                            }
                        } else {
                            InstKind::IntToPtr {
                                result,
                                from_type,
                                value,
                                to_type,
                            }
                        };
                        BlockItem::Instruction(Instruction { kind, span })
                    }
                    "load" => {
                        self.pos += 1;
                        let loaded_type = self.parse_type()?;
                        self.expect_punct(',')?;
                        let _ptr_type = self.parse_type()?;
                        let src = self.parse_operand(&_ptr_type)?;
                        let align = self.parse_align()?;
                        BlockItem::Instruction(Instruction {
                            kind: InstKind::Load {
                                result,
                                loaded_type,
                                src,
                                align,
                            },
                            span,
                        })
                    }
                    "getelementptr" => {
                        self.pos += 1;
                        if self.eat_word("inbounds") {
                            self.warn("skipped \"inbounds\"", span);
                        }
                        let base_type = self.parse_type()?;
                        self.expect_punct(',')?;
                        let ptr_type = self.parse_type()?;
                        let base = self.parse_operand(&ptr_type)?;
                        let mut indices = Vec::new();
                        while self.eat_punct(',') {
                            let ty = self.parse_type()?;
                            let op = self.parse_operand(&ty)?;
                            indices.push((ty, op));
                        }
                        BlockItem::Instruction(Instruction {
                            kind: InstKind::GetElementPtr {
                                result,
                                base_type,
                                base,
                                indices,
                            },
                            span,
                        })
                    }
                    "icmp" => {
                        self.pos += 1;
                        let pred_word = match self.peek() {
                            Some(Token {
                                kind: TokenKind::Word(w),
                                ..
                            }) => w.clone(),
                            _ => {
                                return Err(
                                    self.error_here("expected a predicate", &["eq", "ne", "..."])
                                )
                            }
                        };
                        let predicate = IcmpPredicate::from_word(&pred_word).ok_or_else(|| {
                            self.error_here(
                                format!("unknown icmp predicate \"{pred_word}\""),
                                &[
                                    "eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt",
                                    "uge",
                                ],
                            )
                        })?;
                        self.pos += 1;
                        let ty = self.parse_type()?;
                        let lhs = self.parse_operand(&ty)?;
                        self.expect_punct(',')?;
                        let rhs = self.parse_operand(&ty)?;
                        BlockItem::Instruction(Instruction {
                            kind: InstKind::ICmp {
                                result,
                                predicate,
                                ty,
                                lhs,
                                rhs,
                            },
                            span,
                        })
                    }
                    "alloca" => {
                        self.pos += 1;
                        let ty = self.parse_type()?;
                        let mut count = None;
                        let mut align = None;
                        if self.eat_punct(',') {
                            if self.is_word("align") {
                                self.pos += 1;
                                align = Some(self.parse_align_value()?);
                            } else {
                                let cty = self.parse_type()?;
                                let cop = self.parse_operand(&cty)?;
                                count = Some((cty, cop));
                                align = self.parse_align()?;
                            }
                        }
                        BlockItem::Instruction(Instruction {
                            kind: InstKind::Alloca {
                                result,
                                ty,
                                count,
                                align,
                            },
                            span,
                        })
                    }
                    "phi" => {
                        self.pos += 1;
                        let ty = self.parse_type()?;
                        let mut incomings = Vec::new();
                        loop {
                            self.expect_punct('[')?;
                            let value = self.parse_operand(&ty)?;
                            self.expect_punct(',')?;
                            let label = self.parse_label_ref()?;
                            self.expect_punct(']')?;
                            incomings.push((value, label));
                            if !self.eat_punct(',') {
                                break;
                            }
                        }
                        BlockItem::Phi(PhiNode {
                            result,
                            ty,
                            incomings,
                            span,
                        })
                    }
                    other => {
                        return Err(self.error_here(
                            format!("unsupported opcode \"{other}\""),
                            &[
                                "call",
                                "bitcast",
                                "inttoptr",
                                "load",
                                "getelementptr",
                                "icmp",
                                "alloca",
                            ],
                        ));
                    }
                };
                self.skip_line_metadata(span.line);
                Ok(item)
            }
            _ => Err(self.error_here(
                "expected an instruction",
                &["%name = ...", "call", "store", "ret", "br"],
            )),
        }
    }

    fn parse_call(&mut self, result: Option<String>) -> PResult<InstKind> {
        self.expect_word("call")?;
        let ret_type = self.parse_type()?;
        let callee = match self.peek() {
            Some(Token {
                kind: TokenKind::Global(g),
                ..
            }) => {
                let g = g.clone();
                self.pos += 1;
                g
            }
            _ => return Err(self.error_here("expected a callee", &["@name"])),
        };
        self.expect_punct('(')?;
        let mut args = Vec::new();
        if !self.eat_punct(')') {
            loop {
                let ty = self.parse_type()?;
                let op = self.parse_operand(&ty)?;
                args.push((ty, op));
                if self.eat_punct(',') {
                    continue;
                }
                self.expect_punct(')')?;
                break;
            }
        }
        Ok(InstKind::Call {
            result,
            ret_type,
            callee,
            args,
        })
    }

    fn parse_store(&mut self) -> PResult<InstKind> {
        self.expect_word("store")?;
        let value_type = self.parse_type()?;
        let value = self.parse_operand(&value_type)?;
        self.expect_punct(',')?;
        let ptr_type = self.parse_type()?;
        if ptr_type != Type::ptr(value_type.clone()) {
            self.warn(
                "store pointer type does not match value type",
                self.current_span(),
            );
        }
        let dest = self.parse_operand(&ptr_type)?;
        let align = self.parse_align()?;
        Ok(InstKind::Store {
            value_type,
            value,
            dest,
            align,
        })
    }

    fn parse_align(&mut self) -> PResult<Option<u64>> {
        if self.eat_punct(',') {
            self.expect_word("align")?;
            Ok(Some(self.parse_align_value()?))
        } else {
            Ok(None)
        }
    }

    fn parse_align_value(&mut self) -> PResult<u64> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Int(v),
                ..
            }) if *v >= 0 => {
                let v = *v as u64;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error_here("expected an alignment value", &["integer"])),
        }
    }

    /// Skips `!dbg`-style metadata and attribute references trailing an
    /// instruction on the same source line.
    fn skip_line_metadata(&mut self, line: u32) {
        if let Some(tok) = self.peek() {
            if tok.span.line == line
                && matches!(tok.kind, TokenKind::Punct('!') | TokenKind::Punct('#'))
            {
                let span = tok.span;
                self.warn("skipped instruction metadata", span);
                self.sync_to_next_line(line);
            }
        }
    }

    // ---- types and operands -------------------------------------------------

    fn parse_type(&mut self) -> PResult<Type> {
        if self.nesting >= MAX_NESTING {
            return Err(self.error_here("type nesting too deep", &[]));
        }
        self.nesting += 1;
        let result = self.parse_type_inner();
        self.nesting -= 1;
        result
    }

    fn parse_type_inner(&mut self) -> PResult<Type> {
        let base = match self.peek() {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) => {
                let w = w.clone();
                if w == "void" {
                    self.pos += 1;
                    Type::Void
                } else if w == "double" {
                    self.pos += 1;
                    Type::Double
                } else if let Some(width) = w.strip_prefix('i').and_then(|n| n.parse::<u32>().ok())
                {
                    self.pos += 1;
                    Type::Int(width)
                } else {
                    return Err(self.error_here(format!("expected a type, got \"{w}\""), &["type"]));
                }
            }
            Some(Token {
                kind: TokenKind::Percent(name),
                ..
            }) => {
                let name = name.clone();
                self.pos += 1;
                match name.as_str() {
                    "Pauli" => Type::Pauli,
                    "Range" => Type::Range,
                    "Result" => Type::Result,
                    "Qubit" => Type::Qubit,
                    "Array" => Type::Array,
                    "Tuple" => Type::Tuple,
                    _ => Type::Named(name),
                }
            }
            Some(Token {
                kind: TokenKind::Punct('['),
                ..
            }) => {
                self.pos += 1;
                let size = match self.peek() {
                    Some(Token {
                        kind: TokenKind::Int(v),
                        ..
                    }) if *v >= 0 => {
                        let v = *v as u64;
                        self.pos += 1;
                        v
                    }
                    _ => return Err(self.error_here("expected an array size", &["integer"])),
                };
                self.expect_word("x")?;
                let elem = self.parse_type()?;
                self.expect_punct(']')?;
                Type::SizedArray(size, Box::new(elem))
            }
            Some(Token {
                kind: TokenKind::Punct('{'),
                ..
            }) => {
                self.pos += 1;
                let mut fields = Vec::new();
                if !self.eat_punct('}') {
                    loop {
                        fields.push(self.parse_type()?);
                        if self.eat_punct(',') {
                            continue;
                        }
                        self.expect_punct('}')?;
                        break;
                    }
                }
                Type::Struct(fields)
            }
            _ => return Err(self.error_here("expected a type", &["type"])),
        };

        let mut ty = base;
        loop {
            if self.eat_punct('*') {
                ty = Type::ptr(ty);
            } else if matches!(
                self.peek(),
                Some(Token {
                    kind: TokenKind::Punct('('),
                    ..
                })
            ) {
                // Function type: `ret (params)` — only meaningful when a '*'
                // follows, which the loop handles.
                self.pos += 1;
                let mut params = Vec::new();
                if !self.eat_punct(')') {
                    loop {
                        params.push(self.parse_type()?);
                        if self.eat_punct(',') {
                            continue;
                        }
                        self.expect_punct(')')?;
                        break;
                    }
                }
                ty = Type::Function(Box::new(ty), params);
            } else {
                break;
            }
        }
        Ok(ty)
    }

    fn parse_operand(&mut self, expected: &Type) -> PResult<Operand> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Percent(name),
                ..
            }) => {
                let name = name.clone();
                self.pos += 1;
                Ok(Operand::Local(name))
            }
            Some(Token {
                kind: TokenKind::Global(name),
                ..
            }) => {
                let name = name.clone();
                self.pos += 1;
                Ok(Operand::Global(name))
            }
            _ => Ok(Operand::Const(self.parse_constant(expected)?)),
        }
    }

    fn parse_constant(&mut self, expected: &Type) -> PResult<Constant> {
        if self.nesting >= MAX_NESTING {
            return Err(self.error_here("constant nesting too deep", &[]));
        }
        self.nesting += 1;
        let result = self.parse_constant_inner(expected);
        self.nesting -= 1;
        result
    }

    fn parse_constant_inner(&mut self, expected: &Type) -> PResult<Constant> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) if w == "null" => {
                self.pos += 1;
                Ok(Constant::Null(expected.clone()))
            }
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) if w == "void" => {
                self.pos += 1;
                Ok(Constant::Void)
            }
            Some(Token {
                kind: TokenKind::Word(w),
                span,
                ..
            }) if w == "getelementptr" || w == "extractvalue" || w == "bitcast" => {
                // Constant expressions are stored opaquely: they have no
                // quantum meaning and the analyzer never interprets them.
                let (w, span) = (w.clone(), *span);
                self.pos += 1;
                self.warn(format!("constant expression \"{w}\" stored opaquely"), span);
                self.skip_balanced_parens()?;
                Ok(Constant::Aggregate(Vec::new()))
            }
            Some(Token {
                kind: TokenKind::Int(v),
                ..
            }) => {
                let v = *v;
                self.pos += 1;
                match expected {
                    Type::Double => Ok(Constant::Double(v as f64)),
                    Type::Pauli => Ok(Constant::Pauli((v & 0b11) as u8)),
                    Type::Int(width) => Ok(Constant::Int {
                        width: *width,
                        value: v,
                    }),
                    _ => Ok(Constant::Int {
                        width: 64,
                        value: v,
                    }),
                }
            }
            Some(Token {
                kind: TokenKind::Float(text),
                ..
            }) => {
                let value: f64 = text.parse().unwrap_or(0.0);
                self.pos += 1;
                Ok(Constant::Double(value))
            }
            Some(Token {
                kind: TokenKind::Hex(bits),
                ..
            }) => {
                let bits = *bits;
                self.pos += 1;
                Ok(Constant::Double(f64::from_bits(bits)))
            }
            Some(Token {
                kind: TokenKind::Punct('{'),
                ..
            }) if *expected == Type::Range => {
                self.pos += 1;
                let mut values = [0i64; 3];
                for (i, slot) in values.iter_mut().enumerate() {
                    self.expect_word("i64")?;
                    match self.peek() {
                        Some(Token {
                            kind: TokenKind::Int(v),
                            ..
                        }) => {
                            *slot = *v as i64;
                            self.pos += 1;
                        }
                        _ => return Err(self.error_here("expected an integer", &["integer"])),
                    }
                    if i < 2 {
                        self.expect_punct(',')?;
                    }
                }
                self.expect_punct('}')?;
                Ok(Constant::Range {
                    start: values[0],
                    step: values[1],
                    end: values[2],
                })
            }
            Some(Token {
                kind: TokenKind::Punct('['),
                ..
            }) => {
                self.pos += 1;
                let elem_ty = match expected {
                    Type::SizedArray(_, elem) => (**elem).clone(),
                    _ => Type::Int(64),
                };
                let mut items = Vec::new();
                if !self.eat_punct(']') {
                    loop {
                        items.push(self.parse_constant(&elem_ty)?);
                        if self.eat_punct(',') {
                            continue;
                        }
                        self.expect_punct(']')?;
                        break;
                    }
                }
                Ok(Constant::Aggregate(items))
            }
            _ => Err(self.error_here("expected a value", &["%name", "@name", "constant"])),
        }
    }

    /// Consumes a balanced `( ... )` group, used for opaque constant exprs.
    fn skip_balanced_parens(&mut self) -> PResult<()> {
        self.expect_punct('(')?;
        let mut depth = 1usize;
        while depth > 0 {
            match self.bump().map(|t| &t.kind) {
                Some(TokenKind::Punct('(')) => depth += 1,
                Some(TokenKind::Punct(')')) => depth -= 1,
                Some(_) => {}
                None => {
                    return Err(self.error_here("unbalanced constant expression", &[")"]));
                }
            }
        }
        Ok(())
    }
}

enum BlockItem {
    Instruction(Instruction),
    Phi(PhiNode),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_allocation_line() {
        let tokens = lex("%q = call %Qubit* @__quantum__rt__qubit_allocate()").unwrap();
        let kinds: Vec<String> = tokens.iter().map(|t| t.lexeme.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                "%q",
                "=",
                "call",
                "%Qubit",
                "*",
                "@__quantum__rt__qubit_allocate",
                "(",
                ")"
            ]
        );
        assert!(matches!(tokens.last().unwrap().kind, TokenKind::Punct(')')));
    }

    #[test]
    fn lex_empty_and_comment_only_inputs() {
        assert!(lex("").unwrap().is_empty());
        assert!(lex("; comment only\n").unwrap().is_empty());
    }

    #[test]
    fn lex_rejects_unterminated_string_and_illegal_chars() {
        let err = lex("declare void @\"unterminated").unwrap_err();
        assert!(err.message.contains("unterminated"));
        let err = lex("`").unwrap_err();
        assert!(err.message.contains("illegal character"));
    }

    #[test]
    fn lex_negative_and_float_literals() {
        let tokens = lex("-2 0.5 5.000000e-01 0x3FE0000000000000").unwrap();
        assert!(matches!(tokens[0].kind, TokenKind::Int(-2)));
        assert!(matches!(tokens[1].kind, TokenKind::Float(_)));
        assert!(matches!(tokens[2].kind, TokenKind::Float(_)));
        assert!(matches!(tokens[3].kind, TokenKind::Hex(0x3FE0000000000000)));
    }

    #[test]
    fn spans_are_ordered_and_non_overlapping() {
        let src = "define void @f() {\nentry:\n  ret void\n}\n";
        let tokens = lex(src).unwrap();
        for pair in tokens.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            assert!(
                a.span.line < b.span.line
                    || (a.span.line == b.span.line && a.span.col_end <= b.span.col_start)
            );
        }
    }

    #[test]
    fn malformed_ret_is_an_error() {
        let errors = parse_module("define void @f() {\nentry:\n  ret\n}\n", "t.ll").unwrap_err();
        assert_eq!(errors.len(), 1);
        assert!(errors[0].message.contains("ret requires"));
        assert_eq!(errors[0].span.line, 3);
    }

    #[test]
    fn recovery_collects_multiple_errors() {
        let src = "define void @f() {\n\
                   entry:\n\
                   \x20 %a = frobnicate i64 1\n\
                   \x20 %b = alsobad\n\
                   \x20 ret void\n\
                   }\n";
        let errors = parse_module(src, "t.ll").unwrap_err();
        assert_eq!(errors.len(), 2, "{errors:?}");
        assert_eq!(errors[0].span.line, 3);
        assert_eq!(errors[1].span.line, 4);
    }

    #[test]
    fn error_cap_is_respected() {
        let mut src = String::from("define void @f() {\nentry:\n");
        for i in 0..40 {
            src.push_str(&format!("  %x{i} = bogus\n"));
        }
        src.push_str("  ret void\n}\n");
        let errors = parse_module_with_limit(&src, "t.ll", 5).unwrap_err();
        assert_eq!(errors.len(), 5);
    }

    #[test]
    fn attribute_groups_and_metadata_are_skipped_with_warnings() {
        let src = "define internal void @f() #0 {\n\
                   entry:\n\
                   \x20 call void @g() #1\n\
                   \x20 ret void\n\
                   }\n\
                   declare void @g()\n";
        let (module, warnings) = parse_module(src, "t.ll").unwrap();
        assert!(module.function("f").is_some());
        assert!(warnings.len() >= 2, "{warnings:?}");
    }

    #[test]
    fn determinism_same_input_same_output() {
        let src = include_str!("../../../../corpus/cloning.ll");
        let first = parse_module(src, "cloning.ll").unwrap();
        let second = parse_module(src, "cloning.ll").unwrap();
        assert_eq!(first.0, second.0);
        let t1 = lex(src).unwrap();
        let t2 = lex(src).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn phi_nodes_parse_into_the_block() {
        let src = "define i64 @f(i1 %c) {\n\
                   entry:\n\
                   \x20 br i1 %c, label %a, label %b\n\
                   a:\n\
                   \x20 br label %join\n\
                   b:\n\
                   \x20 br label %join\n\
                   join:\n\
                   \x20 %v = phi i64 [ 1, %a ], [ 2, %b ]\n\
                   \x20 ret i64 %v\n\
                   }\n";
        let (module, _) = parse_module(src, "t.ll").unwrap();
        let f = module.function("f").unwrap();
        let join = f.block("join").unwrap();
        assert_eq!(join.phis.len(), 1);
        assert_eq!(join.phis[0].incomings.len(), 2);
    }

    #[test]
    fn error_positions_point_at_the_offending_token() {
        // Corrupt the opcode of each instruction line of a known-good
        // fixture in turn; the first reported error must land on the
        // corrupted line.
        let good = include_str!("../../../../corpus/ctl_clean.ll");
        assert!(parse_module(good, "t.ll").is_ok());
        for (idx, line) in good.lines().enumerate() {
            let trimmed = line.trim_start();
            let corruptible = trimmed.starts_with("call")
                || trimmed.starts_with("store")
                || trimmed.starts_with("ret");
            if !corruptible {
                continue;
            }
            let mutated: String = good
                .lines()
                .enumerate()
                .map(|(i, l)| {
                    if i == idx {
                        l.replacen(trimmed.split(' ').next().unwrap(), "frobnicate", 1)
                    } else {
                        l.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join("\n");
            let errors = parse_module(&mutated, "t.ll").unwrap_err();
            assert_eq!(
                errors[0].span.line as usize,
                idx + 1,
                "line {} corruption misreported: {:?}",
                idx + 1,
                errors[0]
            );
        }

        let good2 = "define void @f() {\nentry:\n  %q = call %Qubit* @alloc()\n  ret void\n}\ndeclare %Qubit* @alloc()\n";
        let mutated = good2.replace("ret void", "ret banana");
        let errors = parse_module(&mutated, "t.ll").unwrap_err();
        assert_eq!(errors[0].span.line, 4);
        assert!(!errors[0].expected.is_empty());
    }
}
