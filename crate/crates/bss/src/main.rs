use env_logger::{Env, Target};

fn main() {
    env_logger::Builder::from_env(Env::new().filter_or("BSS_OPT_LOG", "warn"))
        .target(Target::Stderr)
        .format_timestamp(None)
        .init();
    std::process::exit(bss_opt::commands::main_with_args(std::env::args_os()));
}
