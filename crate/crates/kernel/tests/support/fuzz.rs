//! Random syscall traffic, mixing plausible calls built from live handles with
//! raw frames of arbitrary numbers and arguments.

#![allow(dead_code)]

use kernel::driver::{Driver, Input};
use kernel::{Param, Status, Syscall, SyscallFrame};
use rand::seq::SliceRandom;
use rand::Rng;

const STRINGS: [&str; 9] = ["x", "y", "k", "A", "B", "list", "/etc/motd", "/tmp/f", ""];

pub struct Fuzzer<R> {
    pub rng: R,
    /// Values that have been handles at some point, plus boot handles.
    pub pool: Vec<u64>,
}

/// What one fuzz step did.
#[derive(Clone, Debug)]
pub struct Step {
    pub syscall: Option<Syscall>,
    pub status: Status,
}

impl<R: Rng> Fuzzer<R> {
    pub fn new(rng: R) -> Self {
        let mut pool: Vec<u64> = (0..40).collect();
        pool.extend(64..110);
        Fuzzer { rng, pool }
    }

    fn value(&mut self) -> u64 {
        match self.rng.gen_range(0..10) {
            0..=6 => *self.pool.choose(&mut self.rng).unwrap(),
            7 | 8 => self.rng.gen_range(0..8),
            _ => self.rng.gen(),
        }
    }

    fn input(&mut self, p: Param) -> Input {
        match p {
            Param::Value(_) => Input::Value(self.value()),
            Param::Str(_) => Input::Str(STRINGS.choose(&mut self.rng).unwrap().to_string()),
            Param::Array(_) => {
                let n = self.rng.gen_range(0..3);
                Input::Handles((0..n).map(|_| self.value()).collect())
            }
            Param::Pairs(_) => {
                let n = self.rng.gen_range(0..3);
                Input::Pairs((0..n).map(|_| (self.value(), self.value())).collect())
            }
            Param::Bytes(_) => {
                let n = self.rng.gen_range(0..8);
                Input::Bytes((0..n).map(|_| self.rng.gen()).collect())
            }
            Param::Buffer(_) => Input::Buffer(self.rng.gen_range(0..32)),
            _ => unreachable!("outputs are not inputs"),
        }
    }

    /// A well-formed call with randomly chosen arguments.
    pub fn plausible(&mut self, d: &mut Driver) -> Step {
        let call = *Syscall::ALL.choose(&mut self.rng).unwrap();
        let inputs: Vec<Input> = call
            .params()
            .iter()
            .filter(|p| !matches!(p, Param::Out(_) | Param::OutList(_) | Param::OutStr(_)))
            .map(|p| self.input(*p))
            .collect();
        let out = d.call(call, &inputs);
        if out.status.is_success() {
            if let Some(h) = out.outputs.first().and_then(|(_, o)| o.value()) {
                self.pool.push(h);
            }
        }
        Step {
            syscall: Some(call),
            status: out.status,
        }
    }

    /// A frame with an arbitrary number and arguments.
    pub fn raw_frame(&mut self, memory_size: u64) -> SyscallFrame {
        let number = if self.rng.gen_bool(0.7) {
            Syscall::ALL.choose(&mut self.rng).unwrap().number()
        } else {
            self.rng.gen()
        };
        let n = self.rng.gen_range(0..10);
        let args = (0..n)
            .map(|_| match self.rng.gen_range(0..4) {
                0 => self.value(),
                1 => self.rng.gen_range(0..memory_size + 16),
                2 => self.rng.gen_range(0..64),
                _ => self.rng.gen(),
            })
            .collect::<Vec<_>>();
        SyscallFrame::new(number, args)
    }
}
