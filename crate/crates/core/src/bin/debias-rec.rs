fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEBIAS_REC_LOG", "warn")).init();
    std::process::exit(debias_rec::cli::run(std::env::args_os()));
}
