// Copyright 2026 The fpforecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FPFORECAST_CLI_H_
#define FPFORECAST_CLI_H_

namespace fpf {

// Exit codes: 0 ok, 1 bad input or usage, 2 numerical failure.
int cli_main(int argc, char** argv);

}  // namespace fpf

#endif  // FPFORECAST_CLI_H_
