// Copyright 2026 The depthseg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <map>
#include <string>
#include <vector>

namespace depthseg {

// Flat "key = value" records; '#' starts a comment. Keys are kept sorted.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& source = "<string>");
KeyValues read_key_values(const std::string& path);
std::string format_key_values(const KeyValues& kv);
void write_key_values(const std::string& path, const KeyValues& kv);

// Typed accessors; each throws ConfigError naming the key on a bad value.
double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::vector<std::string> split_list(const std::string& value, char sep = ',');

// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

// Pads s with spaces to `width` display columns (UTF-8 aware).
std::string pad_right(const std::string& s, size_t width);

}  // namespace depthseg
