#ifndef RELCLASS_IO_H_
#define RELCLASS_IO_H_

#include <string>
#include <string_view>

namespace relclass {

// Throws ParseError when the file cannot be read.
std::string read_text_file(const std::string& path);

// Writes to "<path>.tmp" and renames it over `path`, so readers never see a
// partial file. Throws std::runtime_error on failure.
void write_text_file_atomic(const std::string& path, std::string_view contents);

}  // namespace relclass

#endif  // RELCLASS_IO_H_
