use rand::Rng;

use crate::distributions::JumpDistribution;
use crate::lattice::Point;

/// Outcome of one transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnakeMove {
    Erase,
    Append(Point),
}

/// Snake path w : (−∞, ζ] → ℤ^d.
///
/// Values at or below the running minimum of the lifetime come from the initial path,
/// which is extended lazily (and memoised) as the reversed walk w(j − 1) = w(j) − X.
/// Values above the running minimum sit on an explicit stack.
#[derive(Debug, Clone)]
pub struct SnakeState {
    zeta0: i64,
    zeta: i64,
    /// initial[i] = W₀(ζ₀ − i)
    initial: Vec<Point>,
    /// Current floor is ζ₀ − depth; the path there and below is the initial path.
    depth: usize,
    stack: Vec<Point>,
}

impl SnakeState {
    /// Snake with lifetime `m` and initial head at the origin; lower values drawn on demand.
    pub fn new(m: i64) -> Self {
        SnakeState { zeta0: m, zeta: m, initial: vec![Point::ORIGIN], depth: 0, stack: Vec::new() }
    }

    /// Snake with lifetime `m` whose initial path starts with the given values
    /// W₀(m), W₀(m − 1), …; further values are drawn on demand.
    pub fn with_initial(m: i64, initial: Vec<Point>) -> Self {
        assert!(!initial.is_empty(), "initial path needs its head");
        SnakeState { zeta0: m, zeta: m, initial, depth: 0, stack: Vec::new() }
    }

    #[inline]
    pub fn zeta(&self) -> i64 {
        self.zeta
    }

    pub fn zeta0(&self) -> i64 {
        self.zeta0
    }

    /// min_{j ≤ n} ζ_j.
    pub fn running_min(&self) -> i64 {
        self.zeta0 - self.depth as i64
    }

    #[inline]
    pub fn head(&self) -> Point {
        match self.stack.last() {
            Some(&p) => p,
            None => self.initial[self.depth],
        }
    }

    /// Number of initial values materialised so far.
    pub fn initial_len(&self) -> usize {
        self.initial.len()
    }

    /// w(j) for j ≤ ζ, extending the initial path if needed.
    pub fn read<R: Rng + ?Sized>(&mut self, j: i64, theta: &JumpDistribution, rng: &mut R) -> Point {
        assert!(j <= self.zeta, "w({j}) above the lifetime {}", self.zeta);
        let floor = self.running_min();
        if j > floor {
            return self.stack[(j - floor - 1) as usize];
        }
        let i = (self.zeta0 - j) as usize;
        self.extend_initial(i, theta, rng);
        self.initial[i]
    }

    /// W₀(j) for j ≤ ζ₀, whatever the current state.
    pub fn initial_at<R: Rng + ?Sized>(&mut self, j: i64, theta: &JumpDistribution, rng: &mut R) -> Point {
        assert!(j <= self.zeta0, "W₀({j}) above the initial lifetime {}", self.zeta0);
        let i = (self.zeta0 - j) as usize;
        self.extend_initial(i, theta, rng);
        self.initial[i]
    }

    #[inline]
    fn extend_initial<R: Rng + ?Sized>(&mut self, i: usize, theta: &JumpDistribution, rng: &mut R) {
        while self.initial.len() <= i {
            let last = *self.initial.last().unwrap();
            self.initial.push(last - theta.sample(rng));
        }
    }

    /// Applies a given move.
    #[inline]
    pub fn apply<R: Rng + ?Sized>(&mut self, mv: SnakeMove, theta: &JumpDistribution, rng: &mut R) {
        match mv {
            SnakeMove::Erase => {
                if self.stack.pop().is_none() {
                    self.depth += 1;
                    self.extend_initial(self.depth, theta, rng);
                }
                self.zeta -= 1;
            }
            SnakeMove::Append(x) => {
                let h = self.head();
                self.stack.push(h + x);
                self.zeta += 1;
            }
        }
    }

    /// One transition of the kernel Q: erase or append ŵ + θ-sample, each with probability 1/2.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, theta: &JumpDistribution, rng: &mut R) -> SnakeMove {
        let mv = if rng.random::<bool>() { SnakeMove::Erase } else { SnakeMove::Append(theta.sample(rng)) };
        self.apply(mv, theta, rng);
        mv
    }
}
