fn main() {
    println!("legoqec");
}
