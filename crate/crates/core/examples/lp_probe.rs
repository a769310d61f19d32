use chanconv_core::channel::Channel;
use chanconv_core::config::Config;
use chanconv_core::lp::ns_success_tv;
use std::time::Instant;

fn main() {
    let cfg = Config::default();
    // the largest acceptance LP: W^2 (4x4) against T^4 (16x16)
    let w = Channel::identity(2).product(2, 1 << 24).unwrap();
    let t = Channel::identity(2).product(4, 1 << 24).unwrap();
    let start = Instant::now();
    let rep = ns_success_tv(&w, &t, &cfg, None).unwrap();
    println!(
        "identity n=2 r=2: optimum {} vars {} rows {} in {:?}",
        rep.optimum, rep.n_vars, rep.n_constraints, start.elapsed()
    );
    let w = Channel::bsc(0.1).unwrap().product(2, 1 << 24).unwrap();
    let t = Channel::bsc(0.3).unwrap().product(4, 1 << 24).unwrap();
    let start = Instant::now();
    let rep = ns_success_tv(&w, &t, &cfg, None).unwrap();
    println!(
        "bsc pair n=2 r=2: optimum {} in {:?}",
        rep.optimum, start.elapsed()
    );
}
