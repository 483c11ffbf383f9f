fn main() {
    // Both engines recurse deeply on long answers.
    let child = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(|| kanrel::cli::main_from(std::env::args_os()))
        .expect("spawn main thread");
    std::process::exit(child.join().unwrap_or(2));
}
