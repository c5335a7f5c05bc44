fn main() { hamqec::cli::main_entry(); }
