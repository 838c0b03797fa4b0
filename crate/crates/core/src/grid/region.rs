use super::{Cell, GridShape};

/// A set of cells of a fixed grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    shape: GridShape,
    member: Vec<bool>,
    cells: Vec<usize>,
}

/// `lower ≤ middle ≤ upper` with both ends inside a region and the middle outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvexityWitness {
    pub lower: Cell,
    pub middle: Cell,
    pub upper: Cell,
}

impl Region {
    pub fn from_indices(shape: &GridShape, cells: impl IntoIterator<Item = usize>) -> Self {
        let mut member = vec![false; shape.len()];
        for c in cells {
            member[c] = true;
        }
        let cells = member.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        Region { shape: shape.clone(), member, cells }
    }

    /// Cells outside the grid are ignored by the caller's contract; this panics on them.
    pub fn from_cells<'a>(shape: &GridShape, cells: impl IntoIterator<Item = &'a Cell>) -> Self {
        Self::from_indices(shape, cells.into_iter().map(|c| shape.index(c)))
    }

    pub fn full(shape: &GridShape) -> Self {
        Self::from_indices(shape, 0..shape.len())
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.member[idx]
    }

    pub fn contains_cell(&self, c: &Cell) -> bool {
        self.shape.contains(c) && self.member[self.shape.index(c)]
    }

    /// Member indices in linear order.
    pub fn indices(&self) -> &[usize] {
        &self.cells
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.cells.iter().map(|&i| self.shape.cell(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Lexicographically least member.
    pub fn least(&self) -> Option<usize> {
        self.cells.iter().copied().min_by_key(|&i| self.shape.cell(i))
    }

    /// Indicator of `↑R`: cells above some member.
    pub fn up_closure(&self) -> Vec<bool> {
        let mut up = self.member.clone();
        for i in 0..self.shape.len() {
            if !up[i] {
                up[i] = (0..self.shape.n()).any(|k| self.shape.step_back(i, k).is_some_and(|j| up[j]));
            }
        }
        up
    }

    /// Indicator of `↓R`: cells below some member.
    pub fn down_closure(&self) -> Vec<bool> {
        let mut down = self.member.clone();
        for i in (0..self.shape.len()).rev() {
            if !down[i] {
                down[i] = (0..self.shape.n()).any(|k| self.shape.step(i, k).is_some_and(|j| down[j]));
            }
        }
        down
    }

    /// Order-convexity: `↑R ∩ ↓R ⊆ R`. Returns the witness triple whose middle
    /// is the lexicographically least offending cell.
    pub fn convexity_violation(&self) -> Option<ConvexityWitness> {
        let up = self.up_closure();
        let down = self.down_closure();
        let middle = (0..self.shape.len())
            .filter(|&i| up[i] && down[i] && !self.member[i])
            .min_by_key(|&i| self.shape.cell(i))?;
        let lower = self
            .cells
            .iter()
            .copied()
            .filter(|&a| self.shape.leq_idx(a, middle))
            .min_by_key(|&a| self.shape.cell(a))
            .expect("middle is above a member");
        let upper = self
            .cells
            .iter()
            .copied()
            .filter(|&b| self.shape.leq_idx(middle, b))
            .min_by_key(|&b| self.shape.cell(b))
            .expect("middle is below a member");
        Some(ConvexityWitness {
            lower: self.shape.cell(lower),
            middle: self.shape.cell(middle),
            upper: self.shape.cell(upper),
        })
    }

    pub fn is_convex(&self) -> bool {
        self.convexity_violation().is_none()
    }

    /// Connected components under unit steps that stay inside the region,
    /// each sorted, ordered by their lexicographically least cell.
    pub fn unit_components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.shape.len()];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for &start in &self.cells {
            if label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut comp = vec![start];
            label[start] = id;
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for w in self.shape.neighbours(v) {
                    if self.member[w] && label[w] == usize::MAX {
                        label[w] = id;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by_key(|c| c.iter().map(|&i| self.shape.cell(i)).min());
        comps
    }

    /// Connectivity under arbitrary comparable steps inside the region.
    pub fn is_zigzag_connected(&self) -> bool {
        let comps = self.unit_components();
        if comps.len() <= 1 {
            return true;
        }
        // Merge unit components that contain a comparable pair.
        let k = comps.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for a in 0..k {
            let part = Region::from_indices(&self.shape, comps[a].iter().copied());
            let up = part.up_closure();
            let down = part.down_closure();
            for (b, comp) in comps.iter().enumerate().skip(a + 1) {
                if comp.iter().any(|&i| up[i] || down[i]) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..k).all(|c| find(&mut parent, c) == root)
    }

    /// Connected and order-convex.
    pub fn is_interval(&self) -> bool {
        !self.is_empty() && self.is_convex() && self.unit_components().len() == 1
    }
}
