// Copyright 2026 The hmgame Authors.
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

#ifndef HMGAME_NET_WEBSOCKET_SERVER_H_
#define HMGAME_NET_WEBSOCKET_SERVER_H_

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "hmgame/session_service.h"

namespace hmgame {

// Serves the session wire protocol as JSON text frames over WebSocket. Each
// incoming frame is handed to SessionService::HandleText and the replies are
// written back on the same connection in order.
class WebSocketServer {
 public:
  explicit WebSocketServer(SessionService& service);
  ~WebSocketServer();

  WebSocketServer(const WebSocketServer&) = delete;
  WebSocketServer& operator=(const WebSocketServer&) = delete;

  // Binds and starts `threads` I/O threads. Port 0 picks a free port.
  // Returns the bound port.
  unsigned short Start(const std::string& address, unsigned short port,
                       int threads = 2);
  void Stop();
  // Blocks until Stop() is called from elsewhere or the I/O context runs dry.
  void Wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hmgame

#endif  // HMGAME_NET_WEBSOCKET_SERVER_H_
