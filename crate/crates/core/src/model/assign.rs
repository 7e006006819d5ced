/// Iterates every assignment of a mixed-radix space in lexicographic order,
/// the last position varying fastest. An empty radix list yields exactly one
/// (empty) assignment.
#[derive(Debug, Clone)]
pub struct AssignmentIter {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl AssignmentIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.iter().any(|&s| s == 0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        Self { sizes, next }
    }
}

impl Iterator for AssignmentIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.sizes[i] {
                self.next = Some(succ);
                return Some(current);
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// Product of the given domain sizes.
pub fn domain_product(sizes: impl IntoIterator<Item = usize>) -> usize {
    sizes.into_iter().product()
}
