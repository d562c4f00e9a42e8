//! Live-qubit bookkeeping: the single-qubit list `Q` and the array table
//! `QA`, with one management method per operation the rule engine needs.
//!
//! Everything here is a pure value: each mutating method returns the updated
//! ledger and leaves its input untouched, so per-path snapshots are plain
//! clones. Iteration order is insertion order throughout, which keeps
//! `findqarr` and every diagnostic deterministic across runs.

use crate::ast::SourceSpan;
use indexmap::IndexMap;
use std::collections::BTreeMap;

/// Analyzer-internal unique token for a qubit or array, assigned in creation
/// order by the engine.
pub type HandleId = u32;

/// Where a qubit handle came from. Static handles with the same address are
/// deduplicated by the engine, so handle identity is just the id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitOrigin {
    /// `qubit_allocate()` at the given site.
    DynamicSingle { alloc_span: SourceSpan },
    /// Seeded member of an allocated array, or a member minted on first load
    /// of a slot nothing was stored to.
    DynamicArrayMember { array: HandleId, index: u64 },
    /// `inttoptr` of a compile-time address: a hardware-pinned register,
    /// never runtime-releasable.
    Static { address: u64, span: SourceSpan },
}

#[derive(Clone, Copy, Debug)]
pub struct QubitHandle {
    pub id: HandleId,
    pub origin: QubitOrigin,
}

impl QubitHandle {
    pub fn is_static(&self) -> bool {
        matches!(self.origin, QubitOrigin::Static { .. })
    }
}

impl PartialEq for QubitHandle {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for QubitHandle {}

impl std::hash::Hash for QubitHandle {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

/// How an array handle came to exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrayOrigin {
    /// `qubit_allocate_array(n)` — owns `n` fresh qubits.
    Allocated { span: SourceSpan },
    /// `array_create_1d(sz, n)` — an empty container for existing qubits.
    Created { span: SourceSpan },
    /// An `%Array*` entry parameter of the function under analysis.
    Parameter { span: SourceSpan },
}

#[derive(Clone, Copy, Debug)]
pub struct ArrayHandle {
    pub id: HandleId,
    pub origin: ArrayOrigin,
    /// Declared element count; `None` when the length was not a known
    /// constant (index checks are then disabled).
    pub length: Option<u64>,
}

impl PartialEq for ArrayHandle {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for ArrayHandle {}

impl std::hash::Hash for ArrayHandle {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

/// One `QA` row: the members in insertion order plus, where known, which
/// slot index each member occupies. Slot tracking is what gives repeated
/// loads of the same index a stable handle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QubitRow {
    members: Vec<QubitHandle>,
    slots: BTreeMap<u64, SlotState>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotState {
    Occupied(QubitHandle),
    /// A store of a value the analysis could not resolve landed here.
    Unknown,
}

impl QubitRow {
    pub fn members(&self) -> &[QubitHandle] {
        &self.members
    }

    pub fn contains(&self, q: QubitHandle) -> bool {
        self.members.contains(&q)
    }

    pub fn slot(&self, index: u64) -> Option<SlotState> {
        self.slots.get(&index).copied()
    }
}

/// Raised when a management method's precondition is violated. The rule
/// layer always checks first, so seeing one of these means an analyzer bug,
/// not a program bug.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LedgerFault {
    #[error("qubit q{0} is already tracked")]
    QubitAlreadyTracked(HandleId),
    #[error("qubit q{0} is not tracked")]
    QubitNotTracked(HandleId),
    #[error("array a{0} is already tracked")]
    ArrayAlreadyTracked(HandleId),
    #[error("array a{0} is not tracked")]
    ArrayNotTracked(HandleId),
}

/// The pair (Q, QA): live single qubits and live arrays with their members.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ledger {
    q: Vec<QubitHandle>,
    qa: IndexMap<ArrayHandle, QubitRow>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append `q` to `Q`.
    pub fn appqlist(&self, q: QubitHandle) -> Result<Ledger, LedgerFault> {
        if self.checkq(q) {
            return Err(LedgerFault::QubitAlreadyTracked(q.id));
        }
        let mut next = self.clone();
        next.q.push(q);
        Ok(next)
    }

    /// Append `qarray` to `QA` with an empty row.
    pub fn appqarrlist(&self, a: ArrayHandle) -> Result<Ledger, LedgerFault> {
        if self.checkqarrlist(a) {
            return Err(LedgerFault::ArrayAlreadyTracked(a.id));
        }
        let mut next = self.clone();
        next.qa.insert(a, QubitRow::default());
        Ok(next)
    }

    /// Check if `q` is in `Q`.
    pub fn checkq(&self, q: QubitHandle) -> bool {
        self.q.contains(&q)
    }

    /// Check if `qarray` is in `QA`.
    pub fn checkqarrlist(&self, a: ArrayHandle) -> bool {
        self.qa.contains_key(&a)
    }

    /// Remove `q` from `Q`.
    pub fn delq(&self, q: QubitHandle) -> Result<Ledger, LedgerFault> {
        if !self.checkq(q) {
            return Err(LedgerFault::QubitNotTracked(q.id));
        }
        let mut next = self.clone();
        next.q.retain(|h| *h != q);
        Ok(next)
    }

    /// Remove the row of `qarray` from `QA`. Members of the removed row are
    /// dead afterwards; members that also appear in `Q` are removed from `Q`
    /// as well, so nothing keeps a released array's contents usable.
    pub fn delqarr(&self, a: ArrayHandle) -> Result<(Ledger, Vec<QubitHandle>), LedgerFault> {
        if !self.checkqarrlist(a) {
            return Err(LedgerFault::ArrayNotTracked(a.id));
        }
        let mut next = self.clone();
        let row = next.qa.shift_remove(&a).unwrap_or_default();
        let mut killed = Vec::new();
        for member in row.members() {
            if next.checkq(*member) {
                next.q.retain(|h| h != member);
            }
            killed.push(*member);
        }
        Ok((next, killed))
    }

    /// Append `q` to the row of `qarray`; skip if it is already there.
    pub fn appqarr(&self, a: ArrayHandle, q: QubitHandle) -> Result<Ledger, LedgerFault> {
        let Some(row) = self.qa.get(&a) else {
            return Err(LedgerFault::ArrayNotTracked(a.id));
        };
        if row.contains(q) {
            return Ok(self.clone());
        }
        let mut next = self.clone();
        next.qa.get_mut(&a).expect("row exists").members.push(q);
        Ok(next)
    }

    /// Check if `q` is in the row of `qarray`. A missing array is simply
    /// `false`.
    pub fn checkqarr(&self, a: ArrayHandle, q: QubitHandle) -> bool {
        self.qa.get(&a).is_some_and(|row| row.contains(q))
    }

    /// The first row (in insertion order) containing `q`, if any.
    pub fn findqarr(&self, q: QubitHandle) -> Option<ArrayHandle> {
        self.qa
            .iter()
            .find(|(_, row)| row.contains(q))
            .map(|(a, _)| *a)
    }

    /// Number of rows containing `q`; used to surface multi-array
    /// membership, which the rules neither allow nor forbid.
    pub fn membership_count(&self, q: QubitHandle) -> usize {
        self.qa.values().filter(|row| row.contains(q)).count()
    }

    /// Record which slot of `qarray` the handle occupies, in addition to row
    /// membership. No-op on index collisions with the same handle.
    pub fn set_slot(
        &self,
        a: ArrayHandle,
        index: u64,
        state: SlotState,
    ) -> Result<Ledger, LedgerFault> {
        if !self.checkqarrlist(a) {
            return Err(LedgerFault::ArrayNotTracked(a.id));
        }
        let mut next = self.clone();
        next.qa
            .get_mut(&a)
            .expect("row exists")
            .slots
            .insert(index, state);
        Ok(next)
    }

    pub fn row(&self, a: ArrayHandle) -> Option<&QubitRow> {
        self.qa.get(&a)
    }

    pub fn q_entries(&self) -> &[QubitHandle] {
        &self.q
    }

    pub fn qa_entries(&self) -> impl Iterator<Item = (&ArrayHandle, &QubitRow)> {
        self.qa.iter()
    }

    /// Stable one-line-per-entry dump for golden tests and debugging.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "Q ({} live):", self.q.len());
        for q in &self.q {
            let _ = writeln!(out, "  {}", describe_qubit(*q));
        }
        let _ = writeln!(out, "QA ({} rows):", self.qa.len());
        for (a, row) in &self.qa {
            let len = match a.length {
                Some(n) => n.to_string(),
                None => "?".to_string(),
            };
            let _ = writeln!(out, "  {} len={len}", describe_array(*a));
            for member in row.members() {
                let _ = writeln!(out, "    {}", describe_qubit(*member));
            }
        }
        out
    }
}

fn describe_qubit(q: QubitHandle) -> String {
    match q.origin {
        QubitOrigin::DynamicSingle { alloc_span } => format!("q{} single@{alloc_span}", q.id),
        QubitOrigin::DynamicArrayMember { array, index } => {
            format!("q{} member a{array}[{index}]", q.id)
        }
        QubitOrigin::Static { address, span } => format!("q{} static#{address}@{span}", q.id),
    }
}

fn describe_array(a: ArrayHandle) -> String {
    match a.origin {
        ArrayOrigin::Allocated { span } => format!("a{} allocated@{span}", a.id),
        ArrayOrigin::Created { span } => format!("a{} created@{span}", a.id),
        ArrayOrigin::Parameter { span } => format!("a{} parameter@{span}", a.id),
    }
}
