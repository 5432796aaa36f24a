#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "common/result.hpp"

namespace schoolsense::ingest {

// TCP transport for the line-oriented bus format: one "<topic>\t<payload>\n"
// per message. One reader thread per connection; each connection is
// sequential, so per-resource ordering within a sender is preserved.
class LineListener {
 public:
  using LineHandler = std::function<void(const std::string& line)>;

  LineListener() = default;
  ~LineListener();

  LineListener(const LineListener&) = delete;
  LineListener& operator=(const LineListener&) = delete;

  // addr: "host:port"; port 0 picks an ephemeral port (see bound_port()).
  Status start(const std::string& addr, LineHandler handler);
  void stop();
  int bound_port() const { return port_; }

 private:
  void accept_loop();
  void client_loop(int fd);

  std::atomic<bool> running_{false};
  int listen_fd_ = -1;
  int port_ = 0;
  LineHandler handler_;
  std::thread accept_thread_;
  std::mutex clients_mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> client_threads_;
};

// Client side: connect and send lines (used by replay/simulate sinks).
class LineSender {
 public:
  ~LineSender();
  Status connect(const std::string& addr);
  Status send_line(const std::string& line);
  void close();

 private:
  int fd_ = -1;
};

}  // namespace schoolsense::ingest
