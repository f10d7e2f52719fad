/*
 * Copyright 2026 The Kairos Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef KAIROS_TEXT_UTIL_H_
#define KAIROS_TEXT_UTIL_H_

#include <string>
#include <string_view>
#include <vector>

namespace kairos {

std::string Trim(std::string_view text);
std::vector<std::string> SplitWhitespace(std::string_view text);
std::vector<std::string> SplitLines(std::string_view text);

// Strict numeric parsing; `where` goes into the error message.
double ParseDouble(const std::string& token, const std::string& where);
long ParseLong(const std::string& token, const std::string& where);

// Shortest decimal form that round-trips the exact double value.
std::string FormatDouble(double value);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& content);

}  // namespace kairos

#endif  // KAIROS_TEXT_UTIL_H_
