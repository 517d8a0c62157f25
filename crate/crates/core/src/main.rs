fn main() {
    std::process::exit(qsd_thermo::cli::run());
}
