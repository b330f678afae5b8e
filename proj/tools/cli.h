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

#ifndef FCM_BIAS_TOOLS_CLI_H_
#define FCM_BIAS_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace fcm_bias {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDimension = 3;
inline constexpr int kExitNoConvergence = 4;
inline constexpr int kExitAsymmetric = 5;

// `args` excludes the program name, e.g. {"build", "--data", "x.csv", ...}.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fcm_bias

#endif  // FCM_BIAS_TOOLS_CLI_H_
