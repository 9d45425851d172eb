/// Decides when a first-order loop hands its iterate to Newton polishing:
/// once the gradient is small relative to its scale, or when it has not
/// improved by 10% for `patience` iterations. Failed attempts back off for
/// another `patience` iterations.
pub(crate) struct NewtonTrigger {
    switch: f64,
    patience: usize,
    best: f64,
    since_best: usize,
    cooldown: usize,
}

impl NewtonTrigger {
    pub(crate) fn new(switch: f64, patience: usize) -> Self {
        NewtonTrigger { switch, patience: patience.max(1), best: f64::INFINITY, since_best: 0, cooldown: 0 }
    }

    pub(crate) fn should_try(&mut self, gnorm: f64, scale: f64) -> bool {
        if gnorm < 0.9 * self.best {
            self.best = gnorm;
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        if self.cooldown > 0 {
            self.cooldown -= 1;
            return false;
        }
        gnorm <= self.switch * scale || self.since_best >= self.patience
    }

    pub(crate) fn failed(&mut self) {
        self.cooldown = self.patience;
        self.since_best = 0;
    }
}
