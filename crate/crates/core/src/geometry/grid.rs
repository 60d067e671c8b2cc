use super::GeometryError;

/// Dense row-major 2D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

/// Per-pixel probabilities.
pub type ScoreMap = Grid<f32>;
/// Per-pixel instance labels, 0 = background.
pub type LabelMap = Grid<u32>;
pub type BinaryMap = Grid<bool>;

impl<T> Grid<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self, GeometryError> {
        if height == 0 || width == 0 {
            return Err(GeometryError::Shape(format!("empty grid {height}x{width}")));
        }
        if data.len() != height * width {
            return Err(GeometryError::Shape(format!(
                "{height}x{width} grid needs {} values, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, GeometryError> {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::new(height, width, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid { height: self.height, width: self.width, data: self.data.iter().map(f).collect() }
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> bool {
        self.dims() == other.dims()
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Result<Self, GeometryError> {
        Self::new(height, width, vec![value; height * width])
    }
}

impl ScoreMap {
    /// `value > thresh` per pixel.
    pub fn binarize(&self, thresh: f32) -> BinaryMap {
        self.map(|&v| v > thresh)
    }

    pub fn is_probability(&self) -> bool {
        self.data.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

impl LabelMap {
    pub fn max_label(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}
