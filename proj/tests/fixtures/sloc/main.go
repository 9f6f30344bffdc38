package main

import "fmt"

/*
Usage notes
*/
func main() {
	raw := `C:\path\
// still string`
	fmt.Println(raw) // print
	// done
}
