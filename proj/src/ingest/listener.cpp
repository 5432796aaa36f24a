#include "ingest/listener.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace schoolsense::ingest {

namespace {

Result<std::pair<std::string, int>> split_addr(const std::string& addr) {
  std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos)
    return Error{Errc::invalid_argument, "address must be host:port, got " + addr};
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "0.0.0.0";
  int port = std::atoi(addr.substr(colon + 1).c_str());
  if (port < 0 || port > 65535) return Error{Errc::invalid_argument, "bad port in " + addr};
  return std::pair<std::string, int>{host, port};
}

}  // namespace

LineListener::~LineListener() { stop(); }

Status LineListener::start(const std::string& addr, LineHandler handler) {
  auto parsed = split_addr(addr);
  if (!parsed.ok()) return parsed.error();
  handler_ = std::move(handler);

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) return Error{Errc::io_failure, "socket() failed"};
  int on = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &on, sizeof(on));

  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(std::uint16_t(parsed.value().second));
  if (::inet_pton(AF_INET, parsed.value().first.c_str(), &sa.sin_addr) != 1)
    return Error{Errc::invalid_argument, "bad listen host: " + parsed.value().first};
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    return Error{Errc::io_failure, "bind failed on " + addr};
  }
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    return Error{Errc::io_failure, "listen failed on " + addr};
  }
  socklen_t len = sizeof(sa);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  port_ = ntohs(sa.sin_port);

  running_.store(true);
  accept_thread_ = std::thread([this] { accept_loop(); });
  return Status::success();
}

void LineListener::accept_loop() {
  while (running_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) break;  // listener closed
    std::lock_guard lock(clients_mu_);
    if (!running_.load()) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    client_threads_.emplace_back([this, fd] { client_loop(fd); });
  }
}

void LineListener::client_loop(int fd) {
  std::string buf;
  char chunk[4096];
  for (;;) {
    ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buf.append(chunk, std::size_t(n));
    std::size_t pos = 0;
    for (;;) {
      std::size_t nl = buf.find('\n', pos);
      if (nl == std::string::npos) break;
      std::string line = buf.substr(pos, nl - pos);
      pos = nl + 1;
      if (!line.empty() && handler_) handler_(line);
    }
    buf.erase(0, pos);
  }
  ::close(fd);
}

void LineListener::stop() {
  if (!running_.exchange(false)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  {
    std::lock_guard lock(clients_mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : client_threads_)
    if (t.joinable()) t.join();
  client_threads_.clear();
  client_fds_.clear();
}

LineSender::~LineSender() { close(); }

Status LineSender::connect(const std::string& addr) {
  auto parsed = split_addr(addr);
  if (!parsed.ok()) return parsed.error();
  std::string host = parsed.value().first;
  if (host == "0.0.0.0") host = "127.0.0.1";
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) return Error{Errc::io_failure, "socket() failed"};
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(std::uint16_t(parsed.value().second));
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1)
    return Error{Errc::invalid_argument, "bad host: " + host};
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
    ::close(fd_);
    fd_ = -1;
    return Error{Errc::io_failure, "connect failed to " + addr};
  }
  return Status::success();
}

Status LineSender::send_line(const std::string& line) {
  if (fd_ < 0) return Error{Errc::io_failure, "not connected"};
  std::string out = line;
  out += '\n';
  std::size_t sent = 0;
  while (sent < out.size()) {
    ssize_t n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return Error{Errc::sink_failure, "send failed"};
    sent += std::size_t(n);
  }
  return Status::success();
}

void LineSender::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace schoolsense::ingest
