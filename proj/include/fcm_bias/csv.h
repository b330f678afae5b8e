// Copyright 2026 The fcm-bias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal RFC-4180 reader/writer: quoted fields, doubled quotes, CRLF or LF
// line endings, configurable delimiter.

#ifndef FCM_BIAS_CSV_H_
#define FCM_BIAS_CSV_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fcm_bias::csv {

struct Record {
  std::vector<std::string> fields;
  // 1-based line on which the record starts.
  std::size_t line = 0;
};

// Parses `text` into records. Blank lines are skipped. Throws Error
// (kTypeMismatch) on an unterminated quoted field.
std::vector<Record> Parse(std::string_view text, char delimiter = ',');

// Quotes `field` when it contains the delimiter, a quote or a line break.
std::string Escape(std::string_view field, char delimiter = ',');

std::string JoinRow(const std::vector<std::string>& fields,
                    char delimiter = ',');

// Reads a whole file; throws Error(kIo) naming the path on failure.
std::string ReadFile(const std::string& path);

}  // namespace fcm_bias::csv

#endif  // FCM_BIAS_CSV_H_
