# Band Structure Package
