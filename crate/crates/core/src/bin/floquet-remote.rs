fn main() {
    floquet_remote::cli::main()
}
