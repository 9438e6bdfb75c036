/// A polynomial held as one residue vector per prime, stored contiguously.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsPoly {
    data: Vec<u64>,
    degree: usize,
}

impl RnsPoly {
    pub fn zero(degree: usize, count: usize) -> Self {
        Self { data: vec![0; degree * count], degree }
    }

    pub fn from_components(degree: usize, data: Vec<u64>) -> Option<Self> {
        (degree > 0 && data.len() % degree == 0).then_some(Self { data, degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.degree
    }

    pub fn component(&self, i: usize) -> &[u64] {
        &self.data[i * self.degree..(i + 1) * self.degree]
    }

    pub fn component_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.degree..(i + 1) * self.degree]
    }

    /// Keeps the first `count` components.
    pub fn truncate(&mut self, count: usize) {
        self.data.truncate(count * self.degree);
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }
}
