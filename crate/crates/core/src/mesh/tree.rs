/// Position of an element inside the bisection tree of its root element.
///
/// Bit `k` (counted from the least significant end, after `depth - 1 - k`
/// shifts) records which child was taken at level `k`; `depth` equals the
/// element generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreePath {
    bits: u128,
    depth: u8,
}

impl TreePath {
    pub const MAX_DEPTH: u8 = 127;

    pub const fn root() -> Self {
        TreePath { bits: 0, depth: 0 }
    }

    pub fn child(self, which: u8) -> Self {
        assert!(which < 2, "binary tree");
        assert!(
            self.depth < Self::MAX_DEPTH,
            "bisection depth limit {} exceeded",
            Self::MAX_DEPTH
        );
        TreePath {
            bits: (self.bits << 1) | which as u128,
            depth: self.depth + 1,
        }
    }

    pub fn parent(self) -> Option<Self> {
        (self.depth > 0).then(|| TreePath {
            bits: self.bits >> 1,
            depth: self.depth - 1,
        })
    }

    pub fn depth(self) -> u32 {
        self.depth as u32
    }

    /// Index of the element among the `2^depth` descendants of the root,
    /// counted with child 0 first.
    pub fn index(self) -> u128 {
        self.bits
    }

    /// True if `self` is `other` or one of its ancestors.
    pub fn is_ancestor_of(self, other: TreePath) -> bool {
        other.depth >= self.depth && other.bits >> (other.depth - self.depth) == self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestry() {
        let r = TreePath::root();
        let a = r.child(1).child(0);
        assert!(r.is_ancestor_of(a));
        assert!(r.child(1).is_ancestor_of(a));
        assert!(!r.child(0).is_ancestor_of(a));
        assert_eq!(a.parent().unwrap().parent(), Some(r));
        assert_eq!(a.depth(), 2);
    }
}
