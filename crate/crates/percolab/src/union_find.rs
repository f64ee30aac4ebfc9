//! Disjoint-set forest with path halving and union by size.

pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize);
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// Reset to all-singletons without reallocating.
    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Union the sets of `a` and `b`; returns true when they were distinct.
    #[inline]
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        // size tie broken toward the smaller root id so the forest shape is
        // independent of input labeling quirks
        let (big, small) = if self.size[ra as usize] > self.size[rb as usize]
            || (self.size[ra as usize] == self.size[rb as usize] && ra < rb)
        {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        true
    }

    /// Size of the component containing `x`.
    #[inline]
    pub fn component_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }

    /// Visit `(root, size)` for every component.
    pub fn for_each_root(&self, mut visit: impl FnMut(u32, u32)) {
        for i in 0..self.parent.len() {
            if self.parent[i] == i as u32 {
                visit(i as u32, self.size[i]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_unions() {
        let mut uf = UnionFind::new(10);
        assert!(uf.union(0, 1));
        assert!(uf.union(1, 2));
        assert!(!uf.union(0, 2));
        assert_eq!(uf.component_size(2), 3);
        assert_eq!(uf.component_size(5), 1);

        let mut count = 0;
        let mut total = 0;
        uf.for_each_root(|_, s| {
            count += 1;
            total += s;
        });
        assert_eq!(count, 8);
        assert_eq!(total, 10);
    }

    #[test]
    fn reset_restores_singletons() {
        let mut uf = UnionFind::new(4);
        uf.union(0, 3);
        uf.reset();
        for i in 0..4 {
            assert_eq!(uf.component_size(i), 1);
        }
    }
}
