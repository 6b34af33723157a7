use std::rc::Rc;

use indexmap::IndexMap;

use super::{ErrorKind, Value, ValueError, ValueResult};
use crate::clvm::CompileUnit;

macro_rules! handle {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub struct $name(pub(crate) u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

handle!(StrRef);
handle!(CellRef);
handle!(JsonRef);
handle!(ClosureRef);

/// One cons cell. `tail == None` ends the list.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub head: Value,
    pub tail: Option<CellRef>,
}

/// A function value: code plus captured slots (empty for named functions).
#[derive(Debug, Clone)]
pub struct Closure {
    pub unit: Rc<CompileUnit>,
    pub captures: Vec<Value>,
}

/// Object counts reported by `!memory`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeapStats {
    pub strings: usize,
    pub cells: usize,
    pub jsons: usize,
    pub closures: usize,
}

/// Append-only arena. Objects are never reclaimed during a session.
#[derive(Debug, Default)]
pub struct Heap {
    strings: Vec<String>,
    cells: Vec<Cell>,
    jsons: Vec<IndexMap<String, Value>>,
    closures: Vec<Closure>,
}

fn to_u32(n: usize) -> u32 {
    u32::try_from(n).expect("heap arena exceeded u32 addressing")
}

impl Heap {
    pub fn new() -> Self {
        Heap::default()
    }

    pub fn stats(&self) -> HeapStats {
        HeapStats {
            strings: self.strings.len(),
            cells: self.cells.len(),
            jsons: self.jsons.len(),
            closures: self.closures.len(),
        }
    }

    // ---- strings ----

    pub fn alloc_str(&mut self, s: impl Into<String>) -> Value {
        self.strings.push(s.into());
        Value::Str(StrRef(to_u32(self.strings.len() - 1)))
    }

    pub fn str(&self, r: StrRef) -> &str {
        &self.strings[r.index()]
    }

    pub fn string_len(&self, r: StrRef) -> usize {
        self.str(r).chars().count()
    }

    pub fn char_at(&self, r: StrRef, i: i64) -> ValueResult<char> {
        let s = self.str(r);
        usize::try_from(i)
            .ok()
            .and_then(|i| s.chars().nth(i))
            .ok_or_else(|| {
                ValueError::new(
                    ErrorKind::IndexOutOfRange,
                    format!("string index {i} out of range"),
                )
            })
    }

    pub fn slice_str(&mut self, r: StrRef, lo: Option<i64>, hi: Option<i64>) -> ValueResult<Value> {
        let len = self.string_len(r);
        let (lo, hi) = slice_bounds(lo, hi, len)?;
        let sub: String = self.str(r).chars().skip(lo).take(hi - lo).collect();
        Ok(self.alloc_str(sub))
    }

    // ---- lists ----

    pub fn cons(&mut self, head: Value, tail: Option<CellRef>) -> CellRef {
        self.cells.push(Cell { head, tail });
        CellRef(to_u32(self.cells.len() - 1))
    }

    pub fn cell(&self, r: CellRef) -> Cell {
        self.cells[r.index()]
    }

    /// Prepends `items` (in order) to `tail`, sharing the tail cells.
    pub fn prepend(&mut self, items: &[Value], tail: Option<CellRef>) -> Value {
        let mut list = tail;
        for v in items.iter().rev() {
            list = Some(self.cons(*v, list));
        }
        Value::List(list)
    }

    pub fn list_from<I>(&mut self, items: I) -> Value
    where
        I: IntoIterator<Item = Value>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut list = None;
        for v in items.into_iter().rev() {
            list = Some(self.cons(v, list));
        }
        Value::List(list)
    }

    pub fn list_iter(&self, list: Option<CellRef>) -> ListIter<'_> {
        ListIter { heap: self, next: list }
    }

    pub fn list_len(&self, list: Option<CellRef>) -> usize {
        self.list_iter(list).count()
    }

    pub fn list_head(&self, list: Option<CellRef>) -> ValueResult<Value> {
        match list {
            Some(c) => Ok(self.cell(c).head),
            None => Err(ValueError::new(
                ErrorKind::EmptyListTail,
                "head of the empty list",
            )),
        }
    }

    pub fn list_tail(&self, list: Option<CellRef>) -> ValueResult<Option<CellRef>> {
        match list {
            Some(c) => Ok(self.cell(c).tail),
            None => Err(ValueError::new(
                ErrorKind::EmptyListTail,
                "tail of the empty list",
            )),
        }
    }

    /// Cell holding element `i`, found by walking `i` links.
    pub fn nth_cell(&self, list: Option<CellRef>, i: i64) -> ValueResult<CellRef> {
        let out_of_range = || {
            ValueError::new(
                ErrorKind::IndexOutOfRange,
                format!("list index {i} out of range"),
            )
        };
        if i < 0 {
            return Err(out_of_range());
        }
        let mut cur = list;
        for _ in 0..i {
            let c = cur.ok_or_else(out_of_range)?;
            cur = self.cell(c).tail;
        }
        cur.ok_or_else(out_of_range)
    }

    pub fn list_get(&self, list: Option<CellRef>, i: i64) -> ValueResult<Value> {
        Ok(self.cell(self.nth_cell(list, i)?).head)
    }

    pub fn list_set(&mut self, list: Option<CellRef>, i: i64, v: Value) -> ValueResult<()> {
        let c = self.nth_cell(list, i)?;
        self.cells[c.index()].head = v;
        Ok(())
    }

    /// `L[>i]`: the shared suffix that starts after element `i`.
    pub fn suffix_after(&self, list: Option<CellRef>, i: i64) -> ValueResult<Option<CellRef>> {
        Ok(self.cell(self.nth_cell(list, i)?).tail)
    }

    /// Deep slice: fresh cells for the selected range; element values are
    /// copied one level (nested compound elements stay shared references).
    pub fn slice_list(
        &mut self,
        list: Option<CellRef>,
        lo: Option<i64>,
        hi: Option<i64>,
    ) -> ValueResult<Value> {
        let len = self.list_len(list);
        let (lo, hi) = slice_bounds(lo, hi, len)?;
        let items: Vec<Value> = self.list_iter(list).skip(lo).take(hi - lo).collect();
        Ok(self.list_from(items))
    }

    /// Shallow concatenation: `lhs` cells are copied, `rhs` cells are shared.
    pub fn concat_lists(&mut self, lhs: Option<CellRef>, rhs: Option<CellRef>) -> Value {
        let items: Vec<Value> = self.list_iter(lhs).collect();
        self.prepend(&items, rhs)
    }

    // ---- jsons ----

    pub fn alloc_json(&mut self, fields: IndexMap<String, Value>) -> Value {
        self.jsons.push(fields);
        Value::Json(JsonRef(to_u32(self.jsons.len() - 1)))
    }

    pub fn json(&self, r: JsonRef) -> &IndexMap<String, Value> {
        &self.jsons[r.index()]
    }

    /// Field value, or `null` when the key is absent.
    pub fn json_get(&self, r: JsonRef, key: &str) -> Value {
        self.json(r).get(key).copied().unwrap_or(Value::Null)
    }

    /// Updates the field in place or appends a new one.
    pub fn json_set(&mut self, r: JsonRef, key: &str, v: Value) {
        let fields = &mut self.jsons[r.index()];
        match fields.get_mut(key) {
            Some(slot) => *slot = v,
            None => {
                fields.insert(key.to_string(), v);
            }
        }
    }

    pub fn json_clone(&mut self, r: JsonRef) -> Value {
        let fields = self.json(r).clone();
        self.alloc_json(fields)
    }

    // ---- closures ----

    pub fn alloc_closure(&mut self, closure: Closure) -> Value {
        self.closures.push(closure);
        Value::Func(ClosureRef(to_u32(self.closures.len() - 1)))
    }

    pub fn closure(&self, r: ClosureRef) -> &Closure {
        &self.closures[r.index()]
    }

    // ---- generic ----

    /// `_len` for strings, lists and jsons.
    pub fn len_of(&self, v: Value) -> ValueResult<usize> {
        match v {
            Value::Str(s) => Ok(self.string_len(s)),
            Value::List(l) => Ok(self.list_len(l)),
            Value::Json(j) => Ok(self.json(j).len()),
            other => Err(ValueError::type_error(format!(
                "_len is not defined on {}",
                other.type_id()
            ))),
        }
    }
}

pub struct ListIter<'a> {
    heap: &'a Heap,
    next: Option<CellRef>,
}

impl Iterator for ListIter<'_> {
    type Item = Value;

    fn next(&mut self) -> Option<Value> {
        let c = self.heap.cell(self.next?);
        self.next = c.tail;
        Some(c.head)
    }
}

fn slice_bounds(lo: Option<i64>, hi: Option<i64>, len: usize) -> ValueResult<(usize, usize)> {
    let len_i = len as i64;
    let lo_v = lo.unwrap_or(0);
    let hi_v = hi.unwrap_or(len_i);
    if lo_v < 0 || hi_v > len_i || lo_v > hi_v {
        return Err(ValueError::new(
            ErrorKind::IndexOutOfRange,
            format!("slice [{lo_v}:{hi_v}] out of range for length {len}"),
        ));
    }
    Ok((lo_v as usize, hi_v as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(heap: &mut Heap, xs: &[i32]) -> Option<CellRef> {
        match heap.list_from(xs.iter().map(|&x| Value::Int(x))) {
            Value::List(l) => l,
            _ => unreachable!(),
        }
    }

    fn as_ints(heap: &Heap, l: Option<CellRef>) -> Vec<i32> {
        heap.list_iter(l)
            .map(|v| match v {
                Value::Int(i) => i,
                _ => panic!("not an int"),
            })
            .collect()
    }

    #[test]
    fn head_and_tail() {
        let mut h = Heap::new();
        let l = ints(&mut h, &[5, 1, 4]);
        assert!(matches!(h.list_head(l), Ok(Value::Int(5))));
        let single = ints(&mut h, &[5]);
        assert_eq!(h.list_tail(single).unwrap(), None);
        assert_eq!(h.list_tail(None).unwrap_err().kind, ErrorKind::EmptyListTail);
        assert_eq!(h.list_head(None).unwrap_err().kind, ErrorKind::EmptyListTail);
    }

    #[test]
    fn suffix_shares_cells() {
        let mut h = Heap::new();
        let l = ints(&mut h, &[1, 2, 3]);
        let s = h.suffix_after(l, 0).unwrap();
        assert_eq!(as_ints(&h, s), vec![2, 3]);
        assert_eq!(s, h.cell(l.unwrap()).tail);
        assert_eq!(h.suffix_after(l, 2).unwrap(), None);
        assert_eq!(
            h.suffix_after(None, 0).unwrap_err().kind,
            ErrorKind::IndexOutOfRange
        );
        assert!(h.suffix_after(l, 3).is_err());
    }

    #[test]
    fn slice_clones_and_concat_shares() {
        let mut h = Heap::new();
        let l = ints(&mut h, &[1, 2, 3, 4]);
        let Value::List(c) = h.slice_list(l, Some(1), Some(3)).unwrap() else {
            panic!()
        };
        assert_eq!(as_ints(&h, c), vec![2, 3]);
        h.list_set(c, 0, Value::Int(99)).unwrap();
        assert_eq!(as_ints(&h, l), vec![1, 2, 3, 4]);

        let r = ints(&mut h, &[7]);
        let Value::List(cat) = h.concat_lists(l, r) else {
            panic!()
        };
        assert_eq!(as_ints(&h, cat), vec![1, 2, 3, 4, 7]);
        h.list_set(r, 0, Value::Int(8)).unwrap();
        assert_eq!(as_ints(&h, cat), vec![1, 2, 3, 4, 8]);
        assert!(h.slice_list(l, Some(3), Some(2)).is_err());
        assert!(h.slice_list(l, None, Some(5)).is_err());
    }

    #[test]
    fn json_fields_keep_insertion_order() {
        let mut h = Heap::new();
        let Value::Json(j) = h.alloc_json(IndexMap::new()) else {
            panic!()
        };
        h.json_set(j, "b", Value::Int(1));
        h.json_set(j, "a", Value::Int(2));
        h.json_set(j, "b", Value::Int(3));
        let keys: Vec<_> = h.json(j).keys().cloned().collect();
        assert_eq!(keys, vec!["b", "a"]);
        assert!(matches!(h.json_get(j, "b"), Value::Int(3)));
        assert!(h.json_get(j, "zzz").is_null());
    }

    #[test]
    fn string_slices_and_chars() {
        let mut h = Heap::new();
        let Value::Str(s) = h.alloc_str("Hello World") else {
            panic!()
        };
        let Value::Str(sub) = h.slice_str(s, Some(5), None).unwrap() else {
            panic!()
        };
        assert_eq!(h.str(sub), " World");
        assert_eq!(h.char_at(s, 4).unwrap(), 'o');
        assert!(h.char_at(s, -1).is_err());
        assert!(h.char_at(s, 11).is_err());
    }
}
