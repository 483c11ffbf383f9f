//! Lazy streams with interleaving (fair) combination.
//!
//! A [`Stream`] is either exhausted, has a ready element, or is suspended.
//! Suspensions are forced one at a time by the consumer, so a diverging branch
//! never starves its siblings in [`Stream::mplus`].

use std::rc::Rc;

pub enum Stream<'a, T> {
    Empty,
    Cons(T, Box<Stream<'a, T>>),
    Delay(Box<dyn FnOnce() -> Stream<'a, T> + 'a>),
}

pub type Cont<'a, T, U> = Rc<dyn Fn(T) -> Stream<'a, U> + 'a>;

impl<'a, T: 'a> Stream<'a, T> {
    pub fn unit(x: T) -> Self {
        Stream::Cons(x, Box::new(Stream::Empty))
    }

    pub fn delay(f: impl FnOnce() -> Stream<'a, T> + 'a) -> Self {
        Stream::Delay(Box::new(f))
    }

    /// Fair union: after each element or suspension the two sides trade places.
    pub fn mplus(self, other: Stream<'a, T>) -> Stream<'a, T> {
        match self {
            Stream::Empty => other,
            Stream::Cons(x, rest) => Stream::Cons(x, Box::new(other.mplus(*rest))),
            Stream::Delay(f) => Stream::delay(move || other.mplus(f())),
        }
    }

    /// Feeds every element through `f`, interleaving the resulting streams.
    pub fn bind<U: 'a>(self, f: Cont<'a, T, U>) -> Stream<'a, U> {
        match self {
            Stream::Empty => Stream::Empty,
            Stream::Cons(x, rest) => {
                let head = f(x);
                head.mplus(rest.bind(f))
            }
            Stream::Delay(s) => Stream::delay(move || s().bind(f)),
        }
    }

    pub fn from_iter<I>(it: I) -> Self
    where
        I: Iterator<Item = T> + 'a,
    {
        Stream::delay(move || from_iter_step(it))
    }

    pub fn into_iter(self) -> StreamIter<'a, T> {
        StreamIter {
            stream: Some(self),
            steps: 0,
        }
    }
}

fn from_iter_step<'a, T: 'a, I: Iterator<Item = T> + 'a>(mut it: I) -> Stream<'a, T> {
    match it.next() {
        Some(x) => Stream::Cons(x, Box::new(Stream::delay(move || from_iter_step(it)))),
        None => Stream::Empty,
    }
}

/// How a bounded pull ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pull {
    /// The requested number of elements was produced.
    Complete,
    /// The stream ended.
    Exhausted,
    /// The step budget ran out first.
    OutOfSteps,
}

/// Pulls elements, counting the suspensions it forces.
pub struct StreamIter<'a, T> {
    stream: Option<Stream<'a, T>>,
    steps: u64,
}

impl<'a, T: 'a> StreamIter<'a, T> {
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Next element unless more than `budget` total steps would be needed.
    pub fn next_within(&mut self, budget: u64) -> Result<Option<T>, ()> {
        loop {
            match self.stream.take() {
                None | Some(Stream::Empty) => return Ok(None),
                Some(Stream::Cons(x, rest)) => {
                    self.stream = Some(*rest);
                    return Ok(Some(x));
                }
                Some(Stream::Delay(f)) => {
                    if self.steps >= budget {
                        self.stream = Some(Stream::Delay(f));
                        return Err(());
                    }
                    self.steps += 1;
                    self.stream = Some(f());
                }
            }
        }
    }

    /// Up to `n` elements within `budget` steps.
    pub fn take_within(&mut self, n: usize, budget: u64) -> (Vec<T>, Pull) {
        let mut out = Vec::new();
        while out.len() < n {
            match self.next_within(budget) {
                Ok(Some(x)) => out.push(x),
                Ok(None) => return (out, Pull::Exhausted),
                Err(()) => return (out, Pull::OutOfSteps),
            }
        }
        (out, Pull::Complete)
    }
}

impl<'a, T: 'a> Iterator for StreamIter<'a, T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        self.next_within(u64::MAX).ok().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nats<'a>(from: u32) -> Stream<'a, u32> {
        Stream::Cons(from, Box::new(Stream::delay(move || nats(from + 1))))
    }

    fn never<'a>() -> Stream<'a, u32> {
        Stream::delay(never)
    }

    #[test]
    fn mplus_alternates() {
        let evens = Stream::from_iter((0..).step_by(2));
        let odds = Stream::from_iter((1..).step_by(2));
        let got: Vec<u32> = evens.mplus(odds).into_iter().take(6).collect();
        assert_eq!(got, [0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn diverging_branch_does_not_starve() {
        let s = never().mplus(Stream::unit(7));
        let mut it = s.into_iter();
        assert_eq!(it.next_within(1000), Ok(Some(7)));
    }

    #[test]
    fn bind_interleaves_infinite_children() {
        let s = nats(0).bind(Rc::new(|x: u32| {
            let f: Box<dyn Fn(u32) -> (u32, u32)> = Box::new(move |y| (x, y));
            Stream::from_iter((0..).map(f))
        }));
        let got: Vec<(u32, u32)> = s.into_iter().take(50).collect();
        assert!(got.contains(&(0, 0)) && got.contains(&(1, 0)) && got.contains(&(2, 0)));
    }

    #[test]
    fn bounded_pull_reports_why_it_stopped() {
        let (xs, why) = Stream::from_iter(0..3u32).into_iter().take_within(10, 100);
        assert_eq!((xs, why), (vec![0, 1, 2], Pull::Exhausted));
        let (xs, why) = never().into_iter().take_within(1, 50);
        assert_eq!((xs.len(), why), (0, Pull::OutOfSteps));
    }
}
