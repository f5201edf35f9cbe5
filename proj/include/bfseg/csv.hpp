/*
   Copyright 2026 The bfseg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bfseg::csv {

using Row = std::vector<std::string>;

/// Splits one line; supports double-quoted fields with "" escapes.
Row split_line(std::string_view line);

/// Reads every non-empty line. Handles CRLF and a leading UTF-8 BOM.
std::vector<Row> read(std::istream& in);

std::string escape(std::string_view field);

/// Index of `name` in `header` (case-insensitive), or -1.
int column(const Row& header, std::string_view name);

}  // namespace bfseg::csv
