//! Probabilistic tries keyed by content hashes, extended under external
//! names.
//!
//! Keys are hashed and the hash bits are consumed most significant first,
//! `true` going left. An extension always walks the full configured depth,
//! so the thunks and reference cells on its path are a function of the
//! extension's name and the key alone; keys whose hashes agree on every
//! consumed bit share a small bucket at the leaf.

use nominal_core::engine::{content_hash, Result};
use nominal_core::{ARef, Data, Engine, MemoFn, Name, Pointer};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Trie<K: 'static, V: 'static> {
    Nil,
    Leaf(Vec<(K, V)>),
    Bin(Name, ARef<Trie<K, V>>, ARef<Trie<K, V>>),
}

/// Full hash-width depth.
pub const DEFAULT_TRIE_DEPTH: u32 = 64;

/// Bit `level` of the key's path, most significant first; `true` means left.
pub fn key_bit(hash: u64, level: u32) -> bool {
    hash >> (63 - level) & 1 == 1
}

/// The bit path of a key at a given depth.
pub fn key_bits<K: Data>(key: &K, depth: u32) -> Vec<bool> {
    let h = content_hash(key);
    (0..depth).map(|l| key_bit(h, l)).collect()
}

/// Follow `bits` from `t`, reading cells with recorded dependencies; a
/// leaf reached with bits left over, or bits exhausted before a leaf, is a miss.
pub fn trie_find_bits<K: Data, V: Data>(eng: &mut Engine, t: &Trie<K, V>, bits: &[bool]) -> Result<Option<Vec<(K, V)>>> {
    let mut cur = t.clone();
    for &b in bits {
        cur = match cur {
            Trie::Bin(_, l, r) => eng.get(if b { &l } else { &r })?,
            Trie::Nil | Trie::Leaf(_) => return Ok(None),
        };
    }
    Ok(match cur {
        Trie::Leaf(bucket) => Some(bucket),
        _ => None,
    })
}

type ExtendArg<K, V> = (Name, Trie<K, V>, K, V, u32);

/// Extension and lookup for one key/value type at one depth.
pub struct TrieOps<K: 'static, V: 'static> {
    extend: MemoFn<ExtendArg<K, V>, Trie<K, V>>,
    depth: u32,
}

impl<K, V> Clone for TrieOps<K, V> {
    fn clone(&self) -> Self {
        TrieOps { extend: self.extend.clone(), depth: self.depth }
    }
}

impl<K, V> std::fmt::Debug for TrieOps<K, V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TrieOps(depth {})", self.depth)
    }
}

/// Names used at one level of an extension named `nm`: the next level's
/// thunk, the new node's name, and the left and right child cells.
fn level_names(nm: &Name) -> (Name, Name, Name, Name) {
    nm.fork4()
}

pub fn trie_ops<K: Data, V: Data>(eng: &mut Engine, seed: &Name, label: &str, depth: u32) -> Result<TrieOps<K, V>> {
    assert!((1..=64).contains(&depth), "trie depth must be between 1 and 64");
    let extend = eng.mk_mfn(seed.clone(), &format!("trie-extend:{label}:{depth}"), move |eng, m, (nm, t, key, data, level): ExtendArg<K, V>| {
        if level == depth {
            let mut bucket = match t {
                Trie::Leaf(b) => b,
                _ => Vec::new(),
            };
            match bucket.iter_mut().find(|(k, _)| *k == key) {
                Some(slot) => slot.1 = data,
                None => bucket.push((key, data)),
            }
            return Ok(Trie::Leaf(bucket));
        }
        let (n_next, n_bin, n_left, n_right) = level_names(&nm);
        let left = key_bit(content_hash(&key), level);
        let (l, r) = match t {
            Trie::Bin(_, l, r) => (Some(l), Some(r)),
            _ => (None, None),
        };
        let child = match (left, &l, &r) {
            (true, Some(c), _) | (false, _, Some(c)) => eng.get(c)?,
            _ => Trie::Nil,
        };
        let th = eng.thunk(m, n_next.clone(), (n_next, child, key, data, level + 1))?;
        let sub = eng.force(&th)?;
        let (l, r) = if left {
            let r = match r {
                Some(r) => r,
                None => eng.aref(n_right, Trie::Nil)?,
            };
            (eng.aref(n_left, sub)?, r)
        } else {
            let l = match l {
                Some(l) => l,
                None => eng.aref(n_left, Trie::Nil)?,
            };
            (l, eng.aref(n_right, sub)?)
        };
        Ok(Trie::Bin(n_bin, l, r))
    })?;
    Ok(TrieOps { extend, depth })
}

impl<K: Data, V: Data> TrieOps<K, V> {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Bind `key` to `data` in a copy of `t`, naming the new path from `nm`.
    pub fn extend(&self, eng: &mut Engine, nm: Name, t: &Trie<K, V>, key: K, data: V) -> Result<Trie<K, V>> {
        let th = eng.thunk(&self.extend, nm.clone(), (nm, t.clone(), key, data, 0))?;
        eng.force(&th)
    }

    /// Look `key` up, recording dependencies.
    pub fn find(&self, eng: &mut Engine, t: &Trie<K, V>, key: &K) -> Result<Option<V>> {
        let bits = key_bits(key, self.depth);
        let bucket = trie_find_bits(eng, t, &bits)?;
        Ok(bucket.and_then(|b| b.into_iter().find(|(k, _)| k == key).map(|(_, v)| v)))
    }

    /// Look `key` up without recording anything.
    pub fn peek(&self, eng: &Engine, t: &Trie<K, V>, key: &K) -> Result<Option<V>> {
        let h = content_hash(key);
        let mut cur = t.clone();
        for level in 0..self.depth {
            cur = match cur {
                Trie::Bin(_, l, r) => eng.peek(if key_bit(h, level) { &l } else { &r })?,
                _ => return Ok(None),
            };
        }
        Ok(match cur {
            Trie::Leaf(b) => b.into_iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        })
    }

    /// Every binding, in key-path order, without recording anything.
    pub fn entries(&self, eng: &Engine, t: &Trie<K, V>) -> Result<Vec<(K, V)>> {
        let mut out = Vec::new();
        let mut stack = vec![t.clone()];
        while let Some(cur) = stack.pop() {
            match cur {
                Trie::Nil => {}
                Trie::Leaf(b) => out.extend(b),
                Trie::Bin(_, l, r) => {
                    stack.push(eng.peek(&r)?);
                    stack.push(eng.peek(&l)?);
                }
            }
        }
        Ok(out)
    }

    /// Reference cells on the path to `key`, root first.
    pub fn path_pointers(&self, eng: &Engine, t: &Trie<K, V>, key: &K) -> Result<Vec<Pointer>> {
        let h = content_hash(key);
        let mut out = Vec::new();
        let mut cur = t.clone();
        for level in 0..self.depth {
            cur = match cur {
                Trie::Bin(_, l, r) => {
                    let c = if key_bit(h, level) { l } else { r };
                    out.push(c.pointer().clone());
                    eng.peek(&c)?
                }
                _ => break,
            };
        }
        Ok(out)
    }
}
